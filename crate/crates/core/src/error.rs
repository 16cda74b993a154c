use fpv_pddl::{ActionId, FactId};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CoreError {
    #[error("action {action} is not applicable: precondition {missing} does not hold")]
    InapplicableAction { action: String, missing: String },

    #[error("unknown fact id {0}")]
    UnknownFact(FactId),

    #[error("unknown action id {0}")]
    UnknownAction(ActionId),

    #[error("unknown goal index {0}")]
    UnknownGoal(usize),

    #[error("fact {fact} has no supporter at or below level {level}")]
    UnsupportedFact { fact: String, level: usize },

    #[error("subgoal {subgoal} has {available} supporter samples but {needed} are required")]
    InsufficientSamples {
        subgoal: String,
        available: usize,
        needed: usize,
    },

    #[error("sample count must be positive")]
    ZeroSamples,

    #[error("vector length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("expected one probability table per goal ({expected}), got {found}")]
    TableCountMismatch { expected: usize, found: usize },

    #[error("probability {value} for {fact} is outside [0, 1]")]
    InvalidProbability { fact: String, value: f64 },

    #[error("goal {0} is unreachable from the initial state")]
    UnreachableGoal(usize),

    #[error("search expanded more than {cap} states")]
    CapExceeded { cap: usize },

    #[error("zero-cost cycle on an optimal path: the number of optimal plans is unbounded")]
    ZeroCostCycle,

    #[error("probability table: {0}")]
    Table(String),
}

impl From<csv::Error> for CoreError {
    fn from(e: csv::Error) -> Self {
        CoreError::Table(e.to_string())
    }
}
