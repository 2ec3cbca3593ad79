//! Command-line error type with exit-code mapping.
//!
//! Exit codes: 0 success, 2 validation, 3 numerical failure, 4 I/O.

use bcfkit::ErrorCategory;
use std::path::PathBuf;
use thiserror::Error;

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Core(#[from] bcfkit::Error),

    #[error("{path}: {message}")]
    Input { path: PathBuf, message: String },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => match e.category() {
                ErrorCategory::Validation => 2,
                ErrorCategory::Numerical => 3,
            },
            CliError::Input { .. } | CliError::Usage(_) => 2,
            CliError::Io { .. } => 4,
        }
    }
}

pub fn io_context<T>(context: &str, r: std::io::Result<T>) -> CliResult<T> {
    r.map_err(|source| CliError::Io { context: context.to_string(), source })
}
