//! Scoring goals against observations.

use std::time::Instant;

use fpv_pddl::{ActionId, FactId, GroundProblem};
use serde::Serialize;

use crate::error::CoreError;
use crate::prob::FactProbabilityTable;
use crate::relax::RelaxedState;
use crate::vector::{distance, map_probs, map_state, ProbabilityVector, StateVector};

/// One observation: an executed action or a set of facts seen to hold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ObservationEvent {
    Action(ActionId),
    State(Vec<FactId>),
}

/// Advances the relaxed observed state by one observation.
pub fn progress(
    state: &RelaxedState,
    obs: &ObservationEvent,
    problem: &GroundProblem,
) -> Result<RelaxedState, CoreError> {
    let mut next = state.clone();
    progress_in_place(&mut next, obs, problem)?;
    Ok(next)
}

fn progress_in_place(
    state: &mut RelaxedState,
    obs: &ObservationEvent,
    problem: &GroundProblem,
) -> Result<(), CoreError> {
    match obs {
        ObservationEvent::Action(a) => {
            let action = problem.action(*a).ok_or(CoreError::UnknownAction(*a))?;
            state.apply(action, problem)
        }
        ObservationEvent::State(facts) => {
            for &f in facts {
                if f.index() >= problem.fact_count() {
                    return Err(CoreError::UnknownFact(f));
                }
                state.insert(f);
            }
            Ok(())
        }
    }
}

/// Scores of every goal for one observed state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecognitionResult {
    pub h: Vec<f64>,
    /// Indices of all goals attaining the maximum score.
    pub recognized: Vec<usize>,
}

/// Precomputed goal vectors for repeated scoring.
#[derive(Debug, Clone)]
pub struct Recognizer {
    vectors: Vec<ProbabilityVector>,
    initial: Vec<f64>,
    fact_count: usize,
}

impl Recognizer {
    pub fn new(
        problem: &GroundProblem,
        tables: &[FactProbabilityTable],
    ) -> Result<Self, CoreError> {
        let expected = problem.goals().len();
        if tables.len() != expected {
            return Err(CoreError::TableCountMismatch {
                expected,
                found: tables.len(),
            });
        }
        let nf = problem.fact_count();
        let s0 = map_state(problem.s0().iter().copied(), nf);
        let vectors: Vec<ProbabilityVector> = tables.iter().map(map_probs).collect();
        let initial = vectors
            .iter()
            .map(|v| distance(&s0, v))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Recognizer {
            vectors,
            initial,
            fact_count: nf,
        })
    }

    /// Scores every goal against `state` and keeps the exact maximizers.
    pub fn score(&self, state: &RelaxedState) -> Result<RecognitionResult, CoreError> {
        if state.fact_count() != self.fact_count {
            return Err(CoreError::LengthMismatch {
                left: state.fact_count(),
                right: self.fact_count,
            });
        }
        let st = StateVector::from(state);
        let h = self
            .vectors
            .iter()
            .zip(&self.initial)
            .map(|(v, d0)| distance(&st, v).map(|d| d0 - d))
            .collect::<Result<Vec<f64>, _>>()?;
        let best = h.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let recognized = (0..h.len()).filter(|&i| h[i] == best).collect();
        Ok(RecognitionResult { h, recognized })
    }
}

/// Scores the goals after the whole observation sequence.
pub fn recognize(
    problem: &GroundProblem,
    tables: &[FactProbabilityTable],
    observations: &[ObservationEvent],
) -> Result<RecognitionResult, CoreError> {
    let recognizer = Recognizer::new(problem, tables)?;
    let mut state = RelaxedState::initial(problem);
    for o in observations {
        progress_in_place(&mut state, o, problem)?;
    }
    recognizer.score(&state)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecognitionStep {
    /// Number of observations consumed.
    pub t: usize,
    pub h: Vec<f64>,
    pub recognized: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ns: Option<u64>,
}

/// Per-step results of incremental recognition.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct RecognitionTrace {
    pub steps: Vec<RecognitionStep>,
}

impl RecognitionTrace {
    pub fn last(&self) -> Option<&RecognitionStep> {
        self.steps.last()
    }

    /// Drops wall-clock measurements so traces compare by content only.
    pub fn without_timings(mut self) -> Self {
        for s in &mut self.steps {
            s.elapsed_ns = None;
        }
        self
    }
}

/// Scores after every observation, `t = 1..=T`. Each step costs one pass
/// over the goal vectors regardless of `t`; step `t` equals
/// [`recognize`] on the first `t` observations.
pub fn recognize_online(
    problem: &GroundProblem,
    tables: &[FactProbabilityTable],
    observations: &[ObservationEvent],
) -> Result<RecognitionTrace, CoreError> {
    let recognizer = Recognizer::new(problem, tables)?;
    let mut state = RelaxedState::initial(problem);
    let mut steps = Vec::with_capacity(observations.len());
    for (i, o) in observations.iter().enumerate() {
        let start = Instant::now();
        progress_in_place(&mut state, o, problem)?;
        let RecognitionResult { h, recognized } = recognizer.score(&state)?;
        let elapsed = u64::try_from(start.elapsed().as_nanos()).unwrap_or(u64::MAX);
        steps.push(RecognitionStep {
            t: i + 1,
            h,
            recognized,
            elapsed_ns: Some(elapsed),
        });
    }
    Ok(RecognitionTrace { steps })
}
