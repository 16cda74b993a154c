#![allow(dead_code)]

use std::fs;
use std::path::PathBuf;

use fpv_core::ObservationEvent;
use fpv_pddl::{
    compile_negations_with_goals, ground, parse_domain, parse_ground_literals, parse_problem,
    FactId, GroundProblem,
};

pub const FIXTURES: [&str; 3] = ["chain", "grid", "logistics"];

fn dir(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../bench/fixtures")
        .join(name)
}

fn read(name: &str, file: &str) -> String {
    fs::read_to_string(dir(name).join(file)).unwrap()
}

/// Grounds a bundled fixture with all of its hypotheses as goals.
pub fn fixture(name: &str) -> (GroundProblem, Vec<ObservationEvent>) {
    let hyps_text = read(name, "hyps.dat");
    let hyp_lines: Vec<&str> = hyps_text.lines().filter(|l| !l.trim().is_empty()).collect();
    let hyps: Vec<_> = hyp_lines
        .iter()
        .map(|l| parse_ground_literals(l).unwrap())
        .collect();
    let domain = parse_domain(&read(name, "domain.pddl")).unwrap();
    let first: Vec<String> = hyps[0].iter().map(|l| l.to_string()).collect();
    let template = read(name, "template.pddl").replace("<HYPOTHESIS>", &first.join(" "));
    let problem = parse_problem(&template, &domain).unwrap();
    let (domain, problem, hyps) = compile_negations_with_goals(&domain, &problem, &hyps);
    let g = ground(&domain, &problem, &hyps).unwrap();
    let obs = read(name, "obs.dat")
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|l| {
            ObservationEvent::Action(
                g.action_id(l)
                    .unwrap_or_else(|| panic!("unknown action {l}")),
            )
        })
        .collect();
    (g, obs)
}

pub fn grid() -> (GroundProblem, Vec<ObservationEvent>) {
    fixture("grid")
}

pub fn cell(g: &GroundProblem, i: usize) -> FactId {
    g.fact_id(&format!("(is-at c{i})")).unwrap()
}
