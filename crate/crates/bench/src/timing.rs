//! One-time estimation cost versus per-observation recognition cost on
//! open grids of growing goal and observation counts.

use std::time::Instant;

use fpv_core::{estimate, recognize_online, EstimatorConfig, FactProbabilityTable};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::BenchError;
use crate::generate::GridLayout;
use crate::instance::PreparedInstance;

#[derive(Debug, Clone, PartialEq)]
pub struct TimingConfig {
    pub observation_counts: Vec<usize>,
    pub goal_counts: Vec<usize>,
    pub estimator: EstimatorConfig,
    /// Each measurement is repeated this often and the fastest run kept.
    pub rounds: usize,
}

impl Default for TimingConfig {
    fn default() -> Self {
        TimingConfig {
            observation_counts: vec![5, 10, 25, 50, 100],
            goal_counts: vec![5, 10],
            estimator: EstimatorConfig::default(),
            rounds: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingRow {
    pub goals: usize,
    pub observations: usize,
    pub facts: usize,
    pub estimation_ns_total: f64,
    pub estimation_ns_per_goal: f64,
    pub recognition_ns_per_observation: f64,
}

/// Square open grid just large enough for the longest observation sequence.
/// The start is the top-left corner; goals sit in the far corner and then
/// alternate along the bottom row and right column, so every goal is about
/// equally far away and larger goal sets extend smaller ones.
fn layout(max_obs: usize, goals: usize) -> Result<GridLayout, BenchError> {
    let side = (max_obs + 3) / 2 + 1;
    let side = side.max(goals / 2 + 2);
    let corner = side * side - 1;
    let mut cells = vec![corner];
    for k in 1..side {
        cells.push(corner - k);
        cells.push(corner - k * side);
    }
    if cells.len() < goals {
        return Err(BenchError::InvalidGrid(format!(
            "cannot place {goals} goals"
        )));
    }
    cells.truncate(goals);
    Ok(GridLayout {
        width: side,
        height: side,
        blocked: vec![false; side * side],
        start: 0,
        goals: cells,
        true_goal: 0,
    })
}

fn fastest<T>(
    rounds: usize,
    mut f: impl FnMut() -> Result<T, BenchError>,
) -> Result<(f64, T), BenchError> {
    let mut best = f64::INFINITY;
    let mut last = None;
    for _ in 0..rounds.max(1) {
        let start = Instant::now();
        let out = f()?;
        best = best.min(start.elapsed().as_nanos() as f64);
        last = Some(out);
    }
    Ok((best, last.expect("at least one round")))
}

/// Rows for every (goal count, observation count) pair. Estimation time
/// depends only on the goal count and is repeated across its rows.
pub fn timing_profile(config: &TimingConfig) -> Result<Vec<TimingRow>, BenchError> {
    let max_obs = config.observation_counts.iter().copied().max().unwrap_or(0);
    let mut rows = Vec::new();
    for &goals in &config.goal_counts {
        let grid = layout(max_obs, goals)?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.estimator.seed);
        let path = grid.shortest_path(&mut rng)?;
        let PreparedInstance {
            problem,
            observations,
            ..
        } = grid.instance("timing", path).prepare()?;

        let (est_ns, tables) = fastest(config.rounds, || {
            (0..goals)
                .map(|g| estimate(&problem, g, &config.estimator).map_err(BenchError::from))
                .collect::<Result<Vec<FactProbabilityTable>, _>>()
        })?;

        for &count in &config.observation_counts {
            let prefix = &observations[..count.min(observations.len())];
            let per_obs = if prefix.is_empty() {
                0.0
            } else {
                let mut best = f64::INFINITY;
                for _ in 0..config.rounds.max(1) {
                    let trace = recognize_online(&problem, &tables, prefix)?;
                    let ns: u64 = trace.steps.iter().filter_map(|s| s.elapsed_ns).sum();
                    best = best.min(ns as f64 / prefix.len() as f64);
                }
                best
            };
            rows.push(TimingRow {
                goals,
                observations: prefix.len(),
                facts: problem.fact_count(),
                estimation_ns_total: est_ns,
                estimation_ns_per_goal: est_ns / goals as f64,
                recognition_ns_per_observation: per_obs,
            });
        }
    }
    Ok(rows)
}
