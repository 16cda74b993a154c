use std::collections::BTreeSet;

use fpv_pddl::{
    compile_negations, compile_negations_with_goals, ground, parse_domain, parse_ground_literals,
    parse_problem, FactId, GroundProblem,
};

const GRID_DOMAIN: &str = include_str!("../../bench/fixtures/grid/domain.pddl");
const GRID_TEMPLATE: &str = include_str!("../../bench/fixtures/grid/template.pddl");

const BLOCKED: [usize; 6] = [7, 9, 12, 14, 17, 19];

fn grid() -> GroundProblem {
    let d = parse_domain(GRID_DOMAIN).unwrap();
    let p = parse_problem(&GRID_TEMPLATE.replace("<HYPOTHESIS>", "(is-at c1)"), &d).unwrap();
    let hyps = vec![
        parse_ground_literals("(is-at c1)").unwrap(),
        parse_ground_literals("(is-at c5)").unwrap(),
    ];
    ground(&d, &p, &hyps).unwrap()
}

/// Unordered adjacent open-cell pairs, counted directly from coordinates.
fn open_adjacent_pairs() -> usize {
    let open = |r: usize, c: usize| !BLOCKED.contains(&(5 * (r - 1) + c));
    let mut pairs = 0;
    for r in 1..=5 {
        for c in 1..=5 {
            if !open(r, c) {
                continue;
            }
            if c < 5 && open(r, c + 1) {
                pairs += 1;
            }
            if r < 5 && open(r + 1, c) {
                pairs += 1;
            }
        }
    }
    pairs
}

#[test]
fn grid_has_one_fact_per_cell() {
    let g = grid();
    assert_eq!(g.fact_count(), 25);
    for i in 1..=25 {
        assert!(g.fact_id(&format!("(is-at c{i})")).is_some());
    }
    assert_eq!(g.s0(), &[g.fact_id("(is-at c23)").unwrap()]);
    assert_eq!(g.goals().len(), 2);
}

#[test]
fn grid_moves_follow_open_adjacency() {
    let g = grid();
    assert_eq!(open_adjacent_pairs(), 20);
    assert_eq!(g.action_count(), 2 * open_adjacent_pairs());
    for a in g.actions() {
        let inner = a.name.trim_matches(|c| c == '(' || c == ')');
        let parts: Vec<&str> = inner.split(' ').collect();
        assert_eq!(parts[0], "m");
        let x = g.fact_id(&format!("(is-at {})", parts[1])).unwrap();
        let y = g.fact_id(&format!("(is-at {})", parts[2])).unwrap();
        assert_eq!(a.pre, vec![x]);
        assert_eq!(a.add, vec![y]);
        assert_eq!(a.del, vec![x]);
    }
}

#[test]
fn fact_ids_are_a_bijection() {
    let g = grid();
    for (i, f) in g.facts().iter().enumerate() {
        assert_eq!(f.id, FactId::from(i));
        assert_eq!(g.fact_id(&f.name), Some(f.id));
        assert_eq!(g.fact(f.id).map(|x| x.name.as_str()), Some(f.name.as_str()));
    }
    let names: Vec<&str> = g.facts().iter().map(|f| f.name.as_str()).collect();
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);
    let unique: BTreeSet<&str> = names.iter().copied().collect();
    assert_eq!(unique.len(), names.len());
}

#[test]
fn grounding_is_deterministic() {
    assert_eq!(grid(), grid());
}

const SWITCHES: &str = "
    (define (domain switches)
      (:requirements :strips :typing :negative-preconditions)
      (:types sw)
      (:predicates (on ?s - sw) (ready))
      (:action flip-on :parameters (?s - sw) :precondition (not (on ?s)) :effect (on ?s))
      (:action flip-off :parameters (?s - sw) :precondition (on ?s) :effect (not (on ?s)))
      (:action swap :parameters (?a ?b - sw)
         :precondition (and (on ?a) (not (on ?b)))
         :effect (and (on ?b) (not (on ?a))))
      (:action arm :parameters () :precondition (not (ready)) :effect (ready))
      (:action reset :parameters (?s - sw) :precondition (ready)
         :effect (and (not (ready)) (not (on ?s)))))";

const SWITCHES_PROBLEM: &str = "
    (define (problem p) (:domain switches) (:objects s1 s2 s3 - sw)
      (:init (on s2)) (:goal (and (on s1) (not (on s2)))))";

fn exclusive(g: &GroundProblem, state: &BTreeSet<FactId>) -> bool {
    g.complement_pairs()
        .iter()
        .all(|(p, np)| state.contains(p) != state.contains(np))
}

#[test]
fn compiled_actions_preserve_complement_exclusivity() {
    let d = parse_domain(SWITCHES).unwrap();
    let p = parse_problem(SWITCHES_PROBLEM, &d).unwrap();
    let (cd, cp) = compile_negations(&d, &p);
    let g = ground(&cd, &cp, &[]).unwrap();
    let pairs = g.complement_pairs().to_vec();
    assert_eq!(pairs.len(), 4);

    let init: BTreeSet<FactId> = g.s0().iter().copied().collect();
    assert!(exclusive(&g, &init));

    // every exclusive assignment of the four pairs
    for mask in 0u32..(1 << pairs.len()) {
        let state: BTreeSet<FactId> = pairs
            .iter()
            .enumerate()
            .map(|(i, (p, np))| if mask & (1 << i) != 0 { *p } else { *np })
            .collect();
        for a in g.actions() {
            if !a.pre.iter().all(|f| state.contains(f)) {
                continue;
            }
            let mut next = state.clone();
            for f in &a.del {
                next.remove(f);
            }
            next.extend(a.add.iter().copied());
            assert!(exclusive(&g, &next), "{} breaks exclusivity", a.name);
        }
    }
}

#[test]
fn compiled_goal_uses_complement() {
    let d = parse_domain(SWITCHES).unwrap();
    let p = parse_problem(SWITCHES_PROBLEM, &d).unwrap();
    let hyps = vec![p.goal.clone()];
    let (cd, cp, hyps) = compile_negations_with_goals(&d, &p, &hyps);
    let g = ground(&cd, &cp, &hyps).unwrap();
    let goal: Vec<&str> = g.goals()[0]
        .iter()
        .map(|f| g.fact(*f).unwrap().name.as_str())
        .collect();
    assert_eq!(goal, ["(not-on s2)", "(on s1)"]);
    let flip = g.action(g.action_id("(flip-on s1)").unwrap()).unwrap();
    assert_eq!(flip.pre, vec![g.fact_id("(not-on s1)").unwrap()]);
}

#[test]
fn static_preconditions_match_brute_force() {
    let d = parse_domain(
        "(define (domain links)
           (:predicates (link ?a ?b) (ok ?a) (loop ?a ?b) (seen ?a))
           (:action hop :parameters (?x ?y ?z)
              :precondition (and (link ?x ?y) (link ?y ?z) (ok ?z) (loop ?y ?y) (seen ?x))
              :effect (seen ?z)))",
    )
    .unwrap();
    let p = parse_problem(
        "(define (problem p) (:domain links) (:objects a b c d)
           (:init (seen a) (link a b) (link b c) (link b a) (link c d) (link d d)
                  (ok c) (ok a) (ok d) (loop b b) (loop d d) (loop c b))
           (:goal (seen d)))",
        &d,
    )
    .unwrap();
    let g = ground(&d, &p, &[]).unwrap();
    let link = [("a", "b"), ("b", "c"), ("b", "a"), ("c", "d"), ("d", "d")];
    let ok = ["c", "a", "d"];
    let looped = ["b", "d"];
    let objs = ["a", "b", "c", "d"];
    let mut expected = Vec::new();
    for x in objs {
        for y in objs {
            for z in objs {
                if link.contains(&(x, y))
                    && link.contains(&(y, z))
                    && ok.contains(&z)
                    && looped.contains(&y)
                {
                    expected.push(format!("(hop {x} {y} {z})"));
                }
            }
        }
    }
    let names: Vec<String> = g.actions().iter().map(|a| a.name.clone()).collect();
    assert_eq!(names, expected);
}
