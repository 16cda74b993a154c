use std::collections::{BTreeMap, BTreeSet, HashSet};

use crate::ast::{Atom, DomainAst, Literal, PredicateDecl, ProblemAst, Requirement};
use crate::universe::Universe;

/// Prefix of the complement predicate introduced for a negated predicate.
pub const COMPLEMENT_PREFIX: &str = "not-";

/// Replaces every negative literal `(not (p ..))` with a positive literal
/// over a complement predicate `not-p`, keeps `p`/`not-p` mutually exclusive
/// in every action effect and closes the initial state so exactly one of the
/// pair holds for every ground instance.
pub fn compile_negations(domain: &DomainAst, problem: &ProblemAst) -> (DomainAst, ProblemAst) {
    let (d, p, _) = compile_negations_with_goals(domain, problem, &[]);
    (d, p)
}

/// Like [`compile_negations`], also considering (and rewriting) extra goal
/// descriptions such as recognition hypotheses.
pub fn compile_negations_with_goals(
    domain: &DomainAst,
    problem: &ProblemAst,
    goals: &[Vec<Literal>],
) -> (DomainAst, ProblemAst, Vec<Vec<Literal>>) {
    let negated: BTreeSet<&str> = domain
        .actions
        .iter()
        .flat_map(|a| a.precondition.iter())
        .chain(problem.goal.iter())
        .chain(goals.iter().flatten())
        .filter(|l| !l.positive)
        .map(|l| l.atom.predicate.as_str())
        .filter(|p| domain.predicate(p).is_some())
        .collect();

    if negated.is_empty() {
        return (domain.clone(), problem.clone(), goals.to_vec());
    }

    let mut taken: HashSet<String> = domain.predicates.iter().map(|p| p.name.clone()).collect();
    let mut complements = BTreeMap::new();
    for &p in &negated {
        let mut name = format!("{COMPLEMENT_PREFIX}{p}");
        let mut suffix = 1;
        while taken.contains(&name) {
            name = format!("{COMPLEMENT_PREFIX}{p}-{suffix}");
            suffix += 1;
        }
        taken.insert(name.clone());
        complements.insert(p.to_string(), name);
    }

    let complement_atom = |atom: &Atom| -> Option<Atom> {
        complements
            .get(&atom.predicate)
            .map(|c| Atom::new(c.clone(), atom.args.clone()))
    };
    let rewrite = |lits: &[Literal]| -> Vec<Literal> {
        lits.iter()
            .map(|l| match (l.positive, complement_atom(&l.atom)) {
                (false, Some(c)) => Literal::pos(c),
                _ => l.clone(),
            })
            .collect()
    };

    let mut out = domain.clone();
    out.requirements.remove(&Requirement::NegativePreconditions);
    for (orig, comp) in &complements {
        let decl = domain
            .predicate(orig)
            .expect("negated predicates are declared");
        out.predicates.push(PredicateDecl {
            name: comp.clone(),
            params: decl.params.clone(),
        });
    }
    for action in &mut out.actions {
        action.precondition = rewrite(&action.precondition);
        let extra_del: Vec<Atom> = action.add.iter().filter_map(complement_atom).collect();
        let extra_add: Vec<Atom> = action.delete.iter().filter_map(complement_atom).collect();
        action.delete.extend(extra_del);
        action.add.extend(extra_add);
    }
    out.complements.extend(complements.clone());

    let mut prob = problem.clone();
    prob.goal = rewrite(&problem.goal);
    let universe = Universe::new(domain, problem);
    let present: HashSet<&Atom> = problem.init.iter().collect();
    for (orig, comp) in &complements {
        let decl = domain
            .predicate(orig)
            .expect("negated predicates are declared");
        for tuple in universe.tuples(&decl.params) {
            let atom = Atom::ground(orig, &tuple);
            if !present.contains(&atom) {
                prob.init.push(Atom::ground(comp, &tuple));
            }
        }
    }

    let goals = goals.iter().map(|g| rewrite(g)).collect();
    (out, prob, goals)
}
