//! Experiment harness: configurable Monte Carlo runs over test problems,
//! noise levels and parameter-choice rules, with CSV records, summary
//! statistics and boxplot artifacts.

pub mod config;
pub mod error;
pub mod run;
pub mod summary;
pub mod svg;

pub use config::{ExperimentConfig, ProblemSpec};
pub use error::{BenchError, Result};
pub use run::{run_experiment, run_to_dir, RunOutcome, RunRecord};
pub use summary::{summarize, Summary};
