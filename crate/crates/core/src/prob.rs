//! Fact observation probabilities per goal.

use std::collections::BTreeMap;
use std::fmt;
use std::io;
use std::str::FromStr;

use fixedbitset::FixedBitSet;
use fpv_pddl::{FactId, GroundProblem};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::relax::{build_rpg, fact_name};
use crate::sampler::{
    generate_goal_supporters, sample_subgoal_supporters, SamplerState, SupporterSample,
};
use crate::seed::derive_seed;

/// How goal-level supporter sets become per-fact probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregation {
    /// Fraction of sets containing at least one action that adds the fact.
    #[default]
    EmpiricalUnion,
    /// `1 - prod(1 - q_a)` over achievers, with `q_a` the fraction of sets
    /// containing `a`.
    NoisyOr,
}

impl fmt::Display for Aggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Aggregation::EmpiricalUnion => "empirical-union",
            Aggregation::NoisyOr => "noisy-or",
        })
    }
}

impl FromStr for Aggregation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "empirical-union" => Ok(Aggregation::EmpiricalUnion),
            "noisy-or" => Ok(Aggregation::NoisyOr),
            other => Err(format!(
                "unknown aggregation `{other}` (expected empirical-union or noisy-or)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub samples: usize,
    pub seed: u64,
    pub aggregation: Aggregation,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            samples: 10,
            seed: 0,
            aggregation: Aggregation::EmpiricalUnion,
        }
    }
}

/// `P(f | g)` for every fact `f`, for one goal `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactProbabilityTable {
    goal_index: usize,
    observed: Vec<f64>,
    unreachable: bool,
}

impl FactProbabilityTable {
    /// Wraps explicit values, rejecting anything outside `[0, 1]`.
    pub fn from_values(
        goal_index: usize,
        observed: Vec<f64>,
        problem: &GroundProblem,
    ) -> Result<Self, CoreError> {
        if observed.len() != problem.fact_count() {
            return Err(CoreError::LengthMismatch {
                left: observed.len(),
                right: problem.fact_count(),
            });
        }
        for (i, &v) in observed.iter().enumerate() {
            if !(0.0..=1.0).contains(&v) {
                return Err(CoreError::InvalidProbability {
                    fact: fact_name(problem, FactId::from(i)),
                    value: v,
                });
            }
        }
        Ok(FactProbabilityTable {
            goal_index,
            observed,
            unreachable: false,
        })
    }

    pub(crate) fn unchecked(goal_index: usize, observed: Vec<f64>, unreachable: bool) -> Self {
        FactProbabilityTable {
            goal_index,
            observed,
            unreachable,
        }
    }

    pub fn goal_index(&self) -> usize {
        self.goal_index
    }

    /// Set when the goal is not even relaxed-reachable; only initial facts
    /// then have nonzero probability.
    pub fn is_unreachable(&self) -> bool {
        self.unreachable
    }

    pub fn len(&self) -> usize {
        self.observed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observed.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.observed
    }

    pub fn observed(&self, f: FactId) -> Result<f64, CoreError> {
        self.observed
            .get(f.index())
            .copied()
            .ok_or(CoreError::UnknownFact(f))
    }

    /// Writes `fact_name,p_observed,p_not_observed` rows in fact-id order,
    /// preceded by `# key: value` comment lines.
    pub fn write_csv<W: io::Write>(
        &self,
        problem: &GroundProblem,
        comments: &[(&str, String)],
        mut out: W,
    ) -> Result<(), CoreError> {
        for (k, v) in comments {
            writeln!(out, "# {k}: {v}").map_err(|e| CoreError::Table(e.to_string()))?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["fact_name", "p_observed", "p_not_observed"])?;
        for (i, &p) in self.observed.iter().enumerate() {
            let name = fact_name(problem, FactId::from(i));
            w.write_record([name, p.to_string(), (1.0 - p).to_string()])?;
        }
        w.flush().map_err(|e| CoreError::Table(e.to_string()))?;
        Ok(())
    }

    /// Reads a table written by [`write_csv`](Self::write_csv). Facts missing
    /// from the file get probability 0.
    pub fn read_csv<R: io::Read>(
        goal_index: usize,
        problem: &GroundProblem,
        input: R,
    ) -> Result<Self, CoreError> {
        let mut r = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(input);
        let mut observed = vec![0.0; problem.fact_count()];
        for row in r.records() {
            let row = row?;
            let name = row.get(0).unwrap_or_default().trim();
            let f = problem
                .fact_id(name)
                .ok_or_else(|| CoreError::Table(format!("unknown fact `{name}`")))?;
            let raw = row.get(1).unwrap_or_default().trim();
            observed[f.index()] = raw
                .parse()
                .map_err(|_| CoreError::Table(format!("bad probability `{raw}` for {name}")))?;
        }
        Self::from_values(goal_index, observed, problem)
    }
}

/// `1 - P(f | g)`.
pub fn not_observed(table: &FactProbabilityTable, f: FactId) -> Result<f64, CoreError> {
    table.observed(f).map(|p| 1.0 - p)
}

// path component reserved for the goal-level combination stream
const COMBINE_STREAM: u64 = u64::MAX;

/// Estimates the table of one goal by supporter sampling.
pub fn estimate(
    problem: &GroundProblem,
    goal_index: usize,
    config: &EstimatorConfig,
) -> Result<FactProbabilityTable, CoreError> {
    let n = config.samples;
    if n == 0 {
        return Err(CoreError::ZeroSamples);
    }
    let goal = problem
        .goal(goal_index)
        .ok_or(CoreError::UnknownGoal(goal_index))?;
    let nf = problem.fact_count();
    let initial: Vec<f64> = (0..nf)
        .map(|i| {
            if problem.is_initial(FactId::from(i)) {
                1.0
            } else {
                0.0
            }
        })
        .collect();

    let rpg = build_rpg(problem, goal)?;
    if !rpg.is_goal_reachable() {
        return Ok(FactProbabilityTable::unchecked(goal_index, initial, true));
    }

    let gi = goal_index as u64;
    let mut per_subgoal = BTreeMap::new();
    for (k, &g) in goal.iter().enumerate() {
        let mut sampler = SamplerState::new(derive_seed(config.seed, &[gi, k as u64]));
        per_subgoal.insert(
            g,
            sample_subgoal_supporters(g, &rpg, problem, n, &mut sampler)?,
        );
    }
    let mut combiner = SamplerState::new(derive_seed(config.seed, &[gi, COMBINE_STREAM]));
    let sets = generate_goal_supporters(per_subgoal, n, goal, goal_index, problem, &mut combiner)?;

    let mut observed = match config.aggregation {
        Aggregation::EmpiricalUnion => empirical_union(problem, &sets),
        Aggregation::NoisyOr => noisy_or(problem, &sets),
    };
    for (p, init) in observed.iter_mut().zip(&initial) {
        if *init == 1.0 {
            *p = 1.0;
        }
    }
    // every plan reaching the goal makes each subgoal true, whatever the
    // aggregation says
    for g in goal {
        observed[g.index()] = 1.0;
    }
    Ok(FactProbabilityTable::unchecked(goal_index, observed, false))
}

fn empirical_union(problem: &GroundProblem, sets: &[SupporterSample]) -> Vec<f64> {
    let nf = problem.fact_count();
    let mut hits = vec![0usize; nf];
    let mut covered = FixedBitSet::with_capacity(nf);
    for s in sets {
        covered.clear();
        for a in &s.actions {
            for f in &problem.actions()[a.index()].add {
                covered.insert(f.index());
            }
        }
        for i in covered.ones() {
            hits[i] += 1;
        }
    }
    let n = sets.len() as f64;
    hits.into_iter().map(|h| h as f64 / n).collect()
}

fn noisy_or(problem: &GroundProblem, sets: &[SupporterSample]) -> Vec<f64> {
    let mut used: BTreeMap<usize, usize> = BTreeMap::new();
    for s in sets {
        for a in &s.actions {
            *used.entry(a.index()).or_insert(0) += 1;
        }
    }
    let n = sets.len() as f64;
    let mut miss = vec![1.0f64; problem.fact_count()];
    for (&a, &c) in &used {
        let q = c as f64 / n;
        for f in &problem.actions()[a].add {
            miss[f.index()] *= 1.0 - q;
        }
    }
    miss.into_iter().map(|m| 1.0 - m).collect()
}

/// Estimates every goal's table in parallel; output order follows the goals.
pub fn estimate_all(
    problem: &GroundProblem,
    config: &EstimatorConfig,
) -> Result<Vec<FactProbabilityTable>, CoreError> {
    (0..problem.goals().len())
        .into_par_iter()
        .map(|i| estimate(problem, i, config))
        .collect()
}
