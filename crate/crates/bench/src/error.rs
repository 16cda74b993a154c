use std::io;
use std::path::PathBuf;

use fpv_core::CoreError;
use fpv_pddl::PddlError;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },

    #[error("{}: {source}", path.display())]
    Pddl { path: PathBuf, source: PddlError },

    #[error("{}: real hypothesis `{hypothesis}` is not among the hypotheses", path.display())]
    RealHypothesisNotFound { path: PathBuf, hypothesis: String },

    #[error("{}: line {line}: cannot read observation `{text}`: {reason}", path.display())]
    BadObservation {
        path: PathBuf,
        line: usize,
        text: String,
        reason: String,
    },

    #[error("{}: no hypotheses", path.display())]
    NoHypotheses { path: PathBuf },

    #[error("{}: no observations", path.display())]
    NoObservations { path: PathBuf },

    #[error("observation `{0}` is not a ground action of the domain")]
    UnknownAction(String),

    #[error("true goal `{0}` is unreachable from the initial state")]
    UnreachableTrueGoal(String),

    #[error("no instance directories under {}", .0.display())]
    EmptyDataset(PathBuf),

    #[error("no results to average")]
    NoResults,

    #[error("{results} result sets but {truths} true goals")]
    Misaligned { results: usize, truths: usize },

    #[error("recognized goal set {0} is empty")]
    EmptyRecognizedSet(usize),

    #[error("lambda {0} is outside [0, 1]")]
    InvalidLambda(f64),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error(transparent)]
    Core(#[from] CoreError),
}
