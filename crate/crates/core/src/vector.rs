//! Dense fact vectors and the distance-based goal score.
//!
//! All reductions sum in ascending fact order so results are reproducible
//! bit for bit.

use fpv_pddl::FactId;

use crate::error::CoreError;
use crate::prob::FactProbabilityTable;
use crate::relax::RelaxedState;

/// 0/1 indicator of a state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(pub Vec<f64>);

/// `P(f | g)` for every fact.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector(pub Vec<f64>);

/// Indicator vector of `state` over `fact_count` facts.
///
/// Panics if a fact id is out of range.
pub fn map_state(state: impl IntoIterator<Item = FactId>, fact_count: usize) -> StateVector {
    let mut v = vec![0.0; fact_count];
    for f in state {
        v[f.index()] = 1.0;
    }
    StateVector(v)
}

impl From<&RelaxedState> for StateVector {
    fn from(s: &RelaxedState) -> Self {
        map_state(s.facts(), s.fact_count())
    }
}

pub fn map_probs(table: &FactProbabilityTable) -> ProbabilityVector {
    ProbabilityVector(table.values().to_vec())
}

fn same_len(a: usize, b: usize) -> Result<(), CoreError> {
    if a == b {
        Ok(())
    } else {
        Err(CoreError::LengthMismatch { left: a, right: b })
    }
}

/// Elementwise `s * v` where `v > 0`, else `s`.
///
/// Keeping the raw state entry where the goal has probability zero means an
/// observed fact the goal never produces pushes the state away from it.
pub fn odot(s: &StateVector, v: &ProbabilityVector) -> Result<Vec<f64>, CoreError> {
    same_len(s.0.len(), v.0.len())?;
    Ok(s.0
        .iter()
        .zip(&v.0)
        .map(|(&si, &vi)| if vi > 0.0 { si * vi } else { si })
        .collect())
}

/// `y - x`.
pub fn direction(x: &[f64], y: &[f64]) -> Result<Vec<f64>, CoreError> {
    same_len(x.len(), y.len())?;
    Ok(x.iter().zip(y).map(|(a, b)| b - a).collect())
}

pub fn l2_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |acc, v| acc + v * v).sqrt()
}

/// The two distances whose difference is the score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeuristicTerms {
    /// `|v - s0 ⊙ v|`
    pub initial: f64,
    /// `|v - st ⊙ v|`
    pub current: f64,
}

impl HeuristicTerms {
    pub fn value(&self) -> f64 {
        self.initial - self.current
    }
}

/// Distance from the goal's probability vector to a masked state.
pub fn distance(s: &StateVector, v: &ProbabilityVector) -> Result<f64, CoreError> {
    Ok(l2_norm(&direction(&odot(s, v)?, &v.0)?))
}

pub fn heuristic_terms(
    s0: &StateVector,
    st: &StateVector,
    v: &ProbabilityVector,
) -> Result<HeuristicTerms, CoreError> {
    Ok(HeuristicTerms {
        initial: distance(s0, v)?,
        current: distance(st, v)?,
    })
}

/// How much closer the observed state is to the goal's vector than the
/// initial state was.
pub fn heuristic(
    s0: &StateVector,
    st: &StateVector,
    v: &ProbabilityVector,
) -> Result<f64, CoreError> {
    heuristic_terms(s0, st, v).map(|t| t.value())
}
