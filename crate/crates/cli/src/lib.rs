//! Batch experiment harness around the `hessianfr` library: TOML configs,
//! comparison runs with CSV trajectories, and JSON reports.

pub mod config;
pub mod report;
pub mod runner;

use serde_json::Value;

pub use config::{ConfigError, ExperimentConfig};
pub use runner::{run_experiment, ExperimentReport};

/// A run or analysis that failed for numerical reasons. `diagnostic` is
/// printed to stdout as JSON when present.
#[derive(Debug, thiserror::Error)]
#[error("numerical failure: {message}")]
pub struct NumericalFailure {
    pub message: String,
    pub diagnostic: Option<Value>,
}

impl NumericalFailure {
    pub fn new(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            diagnostic: None,
        }
    }

    pub fn with_diagnostic(message: impl Into<String>, diagnostic: Value) -> Self {
        Self {
            message: message.into(),
            diagnostic: Some(diagnostic),
        }
    }
}

pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

/// 1 for configuration and I/O problems, 2 for numerical failures.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<NumericalFailure>().is_some() {
        EXIT_NUMERICAL
    } else {
        EXIT_CONFIG
    }
}
