use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::Ratio;

/// Non-negative rational action cost.
pub type Cost = Ratio<u64>;

/// Root of every type hierarchy.
pub const OBJECT_TYPE: &str = "object";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Requirement {
    Strips,
    Typing,
    NegativePreconditions,
    ActionCosts,
}

impl Requirement {
    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            ":strips" => Some(Requirement::Strips),
            ":typing" => Some(Requirement::Typing),
            ":negative-preconditions" => Some(Requirement::NegativePreconditions),
            ":action-costs" => Some(Requirement::ActionCosts),
            _ => None,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Requirement::Strips => ":strips",
            Requirement::Typing => ":typing",
            Requirement::NegativePreconditions => ":negative-preconditions",
            Requirement::ActionCosts => ":action-costs",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    Const(String),
}

impl Term {
    pub fn name(&self) -> &str {
        match self {
            Term::Var(n) | Term::Const(n) => n,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(n) => write!(f, "?{n}"),
            Term::Const(n) => f.write_str(n),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, args: Vec<Term>) -> Self {
        Atom {
            predicate: predicate.into(),
            args,
        }
    }

    /// Ground atom over constants.
    pub fn ground<S: AsRef<str>>(predicate: &str, args: &[S]) -> Self {
        Atom {
            predicate: predicate.to_string(),
            args: args
                .iter()
                .map(|a| Term::Const(a.as_ref().to_string()))
                .collect(),
        }
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|t| matches!(t, Term::Const(_)))
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.predicate)?;
        for arg in &self.args {
            write!(f, " {arg}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub atom: Atom,
    pub positive: bool,
}

impl Literal {
    pub fn pos(atom: Atom) -> Self {
        Literal {
            atom,
            positive: true,
        }
    }

    pub fn neg(atom: Atom) -> Self {
        Literal {
            atom,
            positive: false,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "{}", self.atom)
        } else {
            write!(f, "(not {})", self.atom)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TypedName {
    pub name: String,
    pub ty: String,
}

impl TypedName {
    pub fn new(name: impl Into<String>, ty: impl Into<String>) -> Self {
        TypedName {
            name: name.into(),
            ty: ty.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateDecl {
    pub name: String,
    pub params: Vec<TypedName>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSchema {
    pub name: String,
    pub params: Vec<TypedName>,
    pub precondition: Vec<Literal>,
    pub add: Vec<Atom>,
    pub delete: Vec<Atom>,
    pub cost: Cost,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainAst {
    pub name: String,
    pub requirements: BTreeSet<Requirement>,
    /// type name -> parent type
    pub types: BTreeMap<String, String>,
    pub constants: Vec<TypedName>,
    pub predicates: Vec<PredicateDecl>,
    pub actions: Vec<ActionSchema>,
    /// original predicate -> complement predicate, filled by negation
    /// compilation and not part of the printed form.
    pub complements: BTreeMap<String, String>,
}

impl DomainAst {
    pub fn predicate(&self, name: &str) -> Option<&PredicateDecl> {
        self.predicates.iter().find(|p| p.name == name)
    }

    /// True if `ty` equals `ancestor` or descends from it.
    pub fn is_subtype(&self, ty: &str, ancestor: &str) -> bool {
        if ancestor == OBJECT_TYPE {
            return true;
        }
        let mut current = ty;
        // bounded walk in case of a malformed cyclic hierarchy
        for _ in 0..=self.types.len() {
            if current == ancestor {
                return true;
            }
            match self.types.get(current) {
                Some(parent) => current = parent,
                None => return false,
            }
        }
        false
    }

    pub fn has_type(&self, ty: &str) -> bool {
        ty == OBJECT_TYPE || self.types.contains_key(ty)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemAst {
    pub name: String,
    pub domain_name: String,
    pub objects: Vec<TypedName>,
    pub init: Vec<Atom>,
    pub goal: Vec<Literal>,
}

fn write_typed(f: &mut fmt::Formatter<'_>, names: &[TypedName], var: bool) -> fmt::Result {
    for (i, tn) in names.iter().enumerate() {
        if i > 0 {
            f.write_str(" ")?;
        }
        if var {
            f.write_str("?")?;
        }
        write!(f, "{} - {}", tn.name, tn.ty)?;
    }
    Ok(())
}

fn write_cost(f: &mut fmt::Formatter<'_>, cost: &Cost) -> fmt::Result {
    if cost.is_integer() {
        return write!(f, "{}", cost.numer());
    }
    // exact decimal expansion when the denominator has only factors 2 and 5,
    // otherwise a long but finite approximation
    let mut rem = cost.numer() % cost.denom();
    write!(f, "{}.", cost.numer() / cost.denom())?;
    for _ in 0..30 {
        if rem == 0 {
            break;
        }
        let scaled = rem as u128 * 10;
        write!(f, "{}", scaled / *cost.denom() as u128)?;
        rem = (scaled % *cost.denom() as u128) as u64;
    }
    Ok(())
}

impl fmt::Display for DomainAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "(define (domain {})", self.name)?;
        if !self.requirements.is_empty() {
            f.write_str("  (:requirements")?;
            for r in &self.requirements {
                write!(f, " {}", r.tag())?;
            }
            writeln!(f, ")")?;
        }
        if !self.types.is_empty() {
            f.write_str("  (:types")?;
            for (name, parent) in &self.types {
                write!(f, " {name} - {parent}")?;
            }
            writeln!(f, ")")?;
        }
        if !self.constants.is_empty() {
            f.write_str("  (:constants ")?;
            write_typed(f, &self.constants, false)?;
            writeln!(f, ")")?;
        }
        f.write_str("  (:predicates")?;
        for p in &self.predicates {
            write!(f, " ({}", p.name)?;
            if !p.params.is_empty() {
                f.write_str(" ")?;
                write_typed(f, &p.params, true)?;
            }
            f.write_str(")")?;
        }
        writeln!(f, ")")?;
        if self.requirements.contains(&Requirement::ActionCosts) {
            writeln!(f, "  (:functions (total-cost) - number)")?;
        }
        for a in &self.actions {
            writeln!(f, "  (:action {}", a.name)?;
            f.write_str("    :parameters (")?;
            write_typed(f, &a.params, true)?;
            writeln!(f, ")")?;
            f.write_str("    :precondition (and")?;
            for l in &a.precondition {
                write!(f, " {l}")?;
            }
            writeln!(f, ")")?;
            f.write_str("    :effect (and")?;
            for atom in &a.add {
                write!(f, " {atom}")?;
            }
            for atom in &a.delete {
                write!(f, " (not {atom})")?;
            }
            if a.cost != Cost::from_integer(1) {
                f.write_str(" (increase (total-cost) ")?;
                write_cost(f, &a.cost)?;
                f.write_str(")")?;
            }
            writeln!(f, "))")?;
        }
        writeln!(f, ")")
    }
}

impl fmt::Display for ProblemAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "(define (problem {})", self.name)?;
        writeln!(f, "  (:domain {})", self.domain_name)?;
        if !self.objects.is_empty() {
            f.write_str("  (:objects ")?;
            write_typed(f, &self.objects, false)?;
            writeln!(f, ")")?;
        }
        f.write_str("  (:init")?;
        for atom in &self.init {
            write!(f, " {atom}")?;
        }
        writeln!(f, ")")?;
        f.write_str("  (:goal (and")?;
        for l in &self.goal {
            write!(f, " {l}")?;
        }
        writeln!(f, ")))")
    }
}
