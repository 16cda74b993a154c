//! Grid navigation instances of configurable size.

use std::collections::VecDeque;
use std::fmt::Write as _;

use fpv_pddl::{Atom, Literal};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::BenchError;
use crate::instance::{RecognitionInstance, PLACEHOLDER};

const DOMAIN: &str = include_str!("../fixtures/grid/domain.pddl");

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub width: usize,
    pub height: usize,
    pub goals: usize,
    /// Probability that a cell is an obstacle.
    pub blocked: f64,
    pub seed: u64,
}

/// Cells are numbered row by row from the top left; `c{i+1}` is cell `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridLayout {
    pub width: usize,
    pub height: usize,
    pub blocked: Vec<bool>,
    pub start: usize,
    pub goals: Vec<usize>,
    pub true_goal: usize,
}

impl GridLayout {
    fn neighbours(&self, i: usize) -> Vec<usize> {
        let (x, y) = (i % self.width, i / self.width);
        let mut out = Vec::with_capacity(4);
        if y > 0 {
            out.push(i - self.width);
        }
        if x > 0 {
            out.push(i - 1);
        }
        if x + 1 < self.width {
            out.push(i + 1);
        }
        if y + 1 < self.height {
            out.push(i + self.width);
        }
        out.retain(|&j| !self.blocked[j]);
        out
    }

    fn distances(&self, from: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.blocked.len()];
        dist[from] = Some(0);
        let mut queue = VecDeque::from([from]);
        while let Some(c) = queue.pop_front() {
            let d = dist[c].unwrap_or(0);
            for n in self.neighbours(c) {
                if dist[n].is_none() {
                    dist[n] = Some(d + 1);
                    queue.push_back(n);
                }
            }
        }
        dist
    }

    /// A shortest path from the start to the true goal, breaking ties with
    /// `rng`, as move action names.
    pub fn shortest_path(&self, rng: &mut impl Rng) -> Result<Vec<String>, BenchError> {
        let target = self.goals[self.true_goal];
        let dist = self.distances(target);
        if dist[self.start].is_none() {
            return Err(BenchError::InvalidGrid(
                "true goal is not reachable from the start".into(),
            ));
        }
        let mut path = Vec::new();
        let mut at = self.start;
        while at != target {
            let d = dist[at].unwrap_or(0);
            let next: Vec<usize> = self
                .neighbours(at)
                .into_iter()
                .filter(|n| dist[*n] == Some(d - 1))
                .collect();
            let n = *next.choose(rng).expect("a shortest path continues");
            path.push(format!("(m c{} c{})", at + 1, n + 1));
            at = n;
        }
        Ok(path)
    }

    /// Builds the instance files with the given observations.
    pub fn instance(&self, name: &str, observations: Vec<String>) -> RecognitionInstance {
        let n = self.width * self.height;
        let mut t = String::new();
        let _ = writeln!(t, "(define (problem {name})\n  (:domain grid)");
        let objects: Vec<String> = (1..=n).map(|i| format!("c{i}")).collect();
        let _ = writeln!(t, "  (:objects {} - cell)", objects.join(" "));
        let _ = writeln!(t, "  (:init\n    (is-at c{})", self.start + 1);
        for i in (0..n).filter(|i| !self.blocked[*i]) {
            for j in self.neighbours(i) {
                let _ = writeln!(t, "    (adj c{} c{})", i + 1, j + 1);
            }
        }
        let _ = writeln!(t, "  )\n  (:goal (and {PLACEHOLDER})))");
        let hypotheses = self
            .goals
            .iter()
            .map(|g| {
                vec![Literal::pos(Atom::ground(
                    "is-at",
                    &[format!("c{}", g + 1)],
                ))]
            })
            .collect();
        RecognitionInstance {
            name: name.to_string(),
            domain: DOMAIN.to_string(),
            template: t,
            hypotheses,
            true_goal_index: self.true_goal,
            observations,
            paths: None,
        }
    }
}

/// Random grid with obstacles, distinct reachable goal cells and a shortest
/// path to one of them as the observations.
pub fn generate_grid(spec: &GridSpec) -> Result<RecognitionInstance, BenchError> {
    let n = spec.width * spec.height;
    if spec.width == 0 || spec.height == 0 || spec.goals == 0 || spec.goals >= n {
        return Err(BenchError::InvalidGrid(format!(
            "{}x{} grid cannot hold {} goals and a start",
            spec.width, spec.height, spec.goals
        )));
    }
    if !(0.0..1.0).contains(&spec.blocked) {
        return Err(BenchError::InvalidGrid(format!(
            "obstacle rate {} outside [0, 1)",
            spec.blocked
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for _ in 0..1000 {
        let blocked: Vec<bool> = (0..n).map(|_| rng.gen_bool(spec.blocked)).collect();
        let open: Vec<usize> = (0..n).filter(|i| !blocked[*i]).collect();
        let Some(&start) = open.choose(&mut rng) else {
            continue;
        };
        let mut layout = GridLayout {
            width: spec.width,
            height: spec.height,
            blocked,
            start,
            goals: Vec::new(),
            true_goal: 0,
        };
        let dist = layout.distances(start);
        let reachable: Vec<usize> = open
            .iter()
            .copied()
            .filter(|&c| c != start && dist[c].is_some())
            .collect();
        if reachable.len() < spec.goals {
            continue;
        }
        layout.goals = reachable
            .choose_multiple(&mut rng, spec.goals)
            .copied()
            .collect();
        layout.true_goal = rng.gen_range(0..spec.goals);
        let obs = layout.shortest_path(&mut rng)?;
        let name = format!(
            "grid-{}x{}-g{}-s{}",
            spec.width, spec.height, spec.goals, spec.seed
        );
        return Ok(layout.instance(&name, obs));
    }
    Err(BenchError::InvalidGrid(
        "no layout with enough reachable goal cells".into(),
    ))
}
