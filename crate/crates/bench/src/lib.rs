//! Benchmark plumbing for online goal recognition: instance loading,
//! precision and spread over observation fractions, repeated runs, timing
//! profiles and a grid instance generator.

mod error;
pub mod generate;
pub mod instance;
pub mod metrics;
pub mod run;
pub mod timing;

pub use error::BenchError;
pub use generate::{generate_grid, GridLayout, GridSpec};
pub use instance::{
    load_files, load_instance, normalize_hypothesis, InstancePaths, PreparedInstance,
    RecognitionInstance,
};
pub use metrics::{mean_std, precision, prefix_len, spread};
pub use run::{
    default_lambdas, list_instances, run_benchmark, run_instances, write_report, BenchConfig,
    EvaluationReport, Failure, InstanceReport, InstanceRun, MethodSummary, TimingSummary,
};
pub use timing::{timing_profile, TimingConfig, TimingRow};
