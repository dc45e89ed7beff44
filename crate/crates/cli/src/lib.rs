//! Experiment runner behind the `splitfix` binary: reads a JSON experiment
//! config, checks it against the admissibility rules of the chosen
//! algorithm, runs it and writes CSV traces and JSON summaries.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt;

pub mod config;
pub mod run;
pub mod sweep;
pub mod verify;

pub use config::{ExperimentConfig, Overrides};
pub use run::{cmd_run, rate_from_trace_csv, RunSummary};
pub use sweep::cmd_sweep;
pub use verify::cmd_verify;

/// Process exit statuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    ConfigError = 1,
    IterationCap = 2,
    VerifyFailed = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Config(String),
    Io(String),
    Solver(splitfix::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Config(msg) => write!(f, "configuration error: {msg}"),
            Self::Io(msg) => write!(f, "i/o error: {msg}"),
            Self::Solver(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<splitfix::Error> for CliError {
    fn from(e: splitfix::Error) -> Self {
        match e {
            splitfix::Error::Config(msg) => Self::Config(msg),
            other => Self::Solver(other),
        }
    }
}

/// Shortest representation that parses back to the same `f64`.
pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

pub(crate) fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}
