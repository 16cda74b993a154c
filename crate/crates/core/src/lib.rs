//! Goal recognition by comparing observed planning facts against per-goal
//! fact observation probabilities.
//!
//! The pipeline for one recognition problem is:
//!
//! 1. build a relaxed planning graph per candidate goal ([`relax`]),
//! 2. sample sets of supporter actions from it ([`sampler`]),
//! 3. turn the samples into a [`FactProbabilityTable`] per goal ([`prob`]),
//!    or compute the table exactly on small problems ([`oracle`]),
//! 4. score every goal against the relaxed observed state and keep the
//!    maximizers ([`recognize`], using the vector algebra in [`vector`]).

mod error;
pub mod oracle;
pub mod prob;
pub mod recognize;
pub mod relax;
pub mod sampler;
mod seed;
pub mod vector;

pub use error::CoreError;
pub use oracle::{exact_oracle, OracleConfig, DEFAULT_MAX_STATES};
pub use prob::{
    estimate, estimate_all, not_observed, Aggregation, EstimatorConfig, FactProbabilityTable,
};
pub use recognize::{
    progress, recognize, recognize_online, ObservationEvent, RecognitionResult, RecognitionStep,
    RecognitionTrace, Recognizer,
};
pub use relax::{build_rpg, relaxed_apply, relaxed_reachable, RelaxedPlanningGraph, RelaxedState};
pub use sampler::{
    dump_samples, generate_goal_supporters, sample_subgoal_supporters, SampleOrigin, SamplerState,
    SupporterSample,
};
pub use seed::derive_seed;
pub use vector::{
    direction, distance, heuristic, heuristic_terms, l2_norm, map_probs, map_state, odot,
    HeuristicTerms, ProbabilityVector, StateVector,
};
