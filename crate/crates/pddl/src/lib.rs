//! Front end for STRIPS-style PDDL: s-expression reader, domain/problem
//! ASTs, compilation of negative literals into complement predicates, and
//! exhaustive grounding into a propositional [`GroundProblem`].

mod ast;
mod error;
mod ground;
mod negation;
mod parse;
mod sexpr;
mod universe;

pub use ast::{
    ActionSchema, Atom, Cost, DomainAst, Literal, PredicateDecl, ProblemAst, Requirement, Term,
    TypedName, OBJECT_TYPE,
};
pub use error::{PddlError, Pos};
pub use ground::{ground, ActionId, FactId, GroundAction, GroundFact, GroundProblem};
pub use negation::{compile_negations, compile_negations_with_goals, COMPLEMENT_PREFIX};
pub use parse::{parse_domain, parse_ground_literals, parse_problem};
pub use sexpr::canonical_name;
