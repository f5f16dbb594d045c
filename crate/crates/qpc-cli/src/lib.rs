//! Experiment harness behind the `qpc` command-line tool: declarative
//! experiment specs, deterministic parallel evaluation, JSON/CSV
//! reports, and a synthetic scaling benchmark.

pub mod experiment;
pub mod report;
pub mod runner;
pub mod timing;

pub use experiment::{ClassifierSpec, ExperimentSpec, SubsetSpec};
pub use report::{ClassifierReport, EvaluationReport, ExampleRecord, REPORT_SCHEMA};
pub use runner::{distribution_table, run_experiment, DistributionTable};
pub use timing::{run_sweep, SweepGrid, TimingRow};

use thiserror::Error;

/// Harness failure classes; each maps to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad usage or configuration (exit code 1).
    #[error("{0}")]
    Usage(String),
    /// Malformed input data (exit code 2).
    #[error("{0}")]
    Data(String),
    /// Failure while running an otherwise valid experiment (exit code 3).
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }

    /// Wrap a core error that was produced while reading dataset files.
    pub fn from_data_source(err: qpc::Error, context: &str) -> Self {
        match err {
            qpc::Error::IdxMagic { .. }
            | qpc::Error::IdxLength { .. }
            | qpc::Error::IdxLabelValue { .. }
            | qpc::Error::Io(_) => CliError::Data(format!("{context}: {err}")),
            other => CliError::Usage(format!("{context}: {other}")),
        }
    }
}
