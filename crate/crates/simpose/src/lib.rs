//! Config-driven front end for `simpose-core`: reads a JSON job, runs it,
//! and writes a JSON report plus CSV and SVG side files.

pub mod config;
pub mod run;
pub mod svg;

use std::path::PathBuf;

use thiserror::Error;

pub use config::{JobConfig, Task};
pub use run::{execute, run, Report, RunOutcome, Status};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Schema(String),
    #[error("{0}: {1}")]
    Io(PathBuf, #[source] std::io::Error),
    #[error("malformed report {0}: {1}")]
    Report(PathBuf, String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// Process exit code for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) | CliError::Report(..) => 2,
            _ => 1,
        }
    }
}
