//! Sampling of supporter action sets from a relaxed planning graph.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use fpv_pddl::{ActionId, FactId, GroundProblem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::CoreError;
use crate::relax::{fact_name, RelaxedPlanningGraph};

/// Random stream plus the per-action usage counts that steer tie breaking.
#[derive(Debug, Clone)]
pub struct SamplerState {
    rng: ChaCha8Rng,
    counts: BTreeMap<ActionId, u32>,
}

impl SamplerState {
    pub fn new(seed: u64) -> Self {
        SamplerState {
            rng: ChaCha8Rng::seed_from_u64(seed),
            counts: BTreeMap::new(),
        }
    }

    /// How often `a` has been picked so far.
    pub fn count(&self, a: ActionId) -> u32 {
        self.counts.get(&a).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> &BTreeMap<ActionId, u32> {
        &self.counts
    }

    pub(crate) fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleOrigin {
    Subgoal(FactId),
    Goal(usize),
}

/// One sampled set of supporter actions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupporterSample {
    pub actions: BTreeSet<ActionId>,
    pub origin: SampleOrigin,
}

/// Draws `n` supporter sets for `subgoal`.
///
/// Each draw walks the graph backwards from the last level. An open fact is
/// supported by an action from the earliest layer (at or below the current
/// one) that adds it, preferring the action used least often so far and
/// breaking remaining ties uniformly. The chosen action's preconditions that
/// are neither initial nor already handled become open at the next lower
/// level, and everything it adds counts as handled.
///
/// A subgoal that already holds initially gets `n` empty sets.
pub fn sample_subgoal_supporters(
    subgoal: FactId,
    rpg: &RelaxedPlanningGraph,
    problem: &GroundProblem,
    n: usize,
    sampler: &mut SamplerState,
) -> Result<Vec<SupporterSample>, CoreError> {
    if subgoal.index() >= problem.fact_count() {
        return Err(CoreError::UnknownFact(subgoal));
    }
    let origin = SampleOrigin::Subgoal(subgoal);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let mut sups = BTreeSet::new();
        if problem.is_initial(subgoal) {
            out.push(SupporterSample {
                actions: sups,
                origin,
            });
            continue;
        }
        let mut open = BTreeSet::from([subgoal]);
        let mut found: BTreeSet<FactId> = BTreeSet::new();
        for t in (0..=rpg.levels()).rev() {
            let mut next_open = BTreeSet::new();
            while let Some(p) = open.pop_first() {
                let candidates = earliest_supporters(rpg, problem, p, t);
                if candidates.is_empty() {
                    return Err(CoreError::UnsupportedFact {
                        fact: fact_name(problem, p),
                        level: t,
                    });
                }
                let least = candidates
                    .iter()
                    .map(|a| sampler.count(*a))
                    .min()
                    .unwrap_or(0);
                let tied: Vec<ActionId> = candidates
                    .into_iter()
                    .filter(|a| sampler.count(*a) == least)
                    .collect();
                let a = tied[sampler.rng().gen_range(0..tied.len())];

                found.insert(p);
                sups.insert(a);
                *sampler.counts.entry(a).or_insert(0) += 1;

                let action = &problem.actions()[a.index()];
                for &q in &action.pre {
                    if !problem.is_initial(q) && !found.contains(&q) && !open.contains(&q) {
                        next_open.insert(q);
                    }
                }
                for &r in &action.add {
                    open.remove(&r);
                    next_open.remove(&r);
                    found.insert(r);
                }
            }
            open = next_open;
        }
        debug_assert!(open.is_empty());
        out.push(SupporterSample {
            actions: sups,
            origin,
        });
    }
    Ok(out)
}

/// Achievers of `p` from the lowest graph layer `<= t` that has any.
fn earliest_supporters(
    rpg: &RelaxedPlanningGraph,
    problem: &GroundProblem,
    p: FactId,
    t: usize,
) -> Vec<ActionId> {
    let mut best: Option<usize> = None;
    let mut out = Vec::new();
    for &a in problem.achievers(p) {
        let Some(level) = rpg.action_level(a) else {
            continue;
        };
        if level > t {
            continue;
        }
        match best {
            Some(b) if level > b => {}
            Some(b) if level == b => out.push(a),
            _ => {
                best = Some(level);
                out.clear();
                out.push(a);
            }
        }
    }
    out.sort_unstable();
    out
}

/// Combines per-subgoal samples into `n` goal-level sets.
///
/// Set `i` is the union of one sample per subgoal, each drawn uniformly
/// without replacement from that subgoal's pool.
pub fn generate_goal_supporters(
    mut per_subgoal: BTreeMap<FactId, Vec<SupporterSample>>,
    n: usize,
    goal: &[FactId],
    goal_index: usize,
    problem: &GroundProblem,
    sampler: &mut SamplerState,
) -> Result<Vec<SupporterSample>, CoreError> {
    for &g in goal {
        let available = per_subgoal.get(&g).map_or(0, Vec::len);
        if available < n {
            return Err(CoreError::InsufficientSamples {
                subgoal: fact_name(problem, g),
                available,
                needed: n,
            });
        }
    }
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let mut actions = BTreeSet::new();
        for g in goal {
            let pool = per_subgoal.get_mut(g).expect("checked above");
            let pick = sampler.rng().gen_range(0..pool.len());
            actions.extend(pool.remove(pick).actions);
        }
        out.push(SupporterSample {
            actions,
            origin: SampleOrigin::Goal(goal_index),
        });
    }
    Ok(out)
}

/// One line per sample with its action names.
pub fn dump_samples(samples: &[SupporterSample], problem: &GroundProblem) -> String {
    let mut out = String::new();
    for (i, s) in samples.iter().enumerate() {
        let names: Vec<&str> = s
            .actions
            .iter()
            .filter_map(|a| problem.action(*a))
            .map(|a| a.name.as_str())
            .collect();
        let _ = writeln!(out, "{i}: {{{}}}", names.join(", "));
    }
    out
}
