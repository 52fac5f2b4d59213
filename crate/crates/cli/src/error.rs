use serde_json::json;
use std::fmt::Display;
use std::path::Path;
use thiserror::Error;

/// A failed run, classified by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags or flag combinations. Exit code 2.
    #[error("{0}")]
    Usage(String),
    /// Unreadable, malformed or unusable input data. Exit code 2.
    #[error("{0}")]
    Input(String),
    /// A solver or internal failure. Exit code 1.
    #[error("{0}")]
    Internal(String),
    /// Self-checks ran but some did not pass. Exit code 1.
    #[error("{failed} of {total} checks failed")]
    ChecksFailed { failed: usize, total: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Input(_) => 2,
            CliError::Internal(_) | CliError::ChecksFailed { .. } => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Input(_) => "input",
            CliError::Internal(_) => "internal",
            CliError::ChecksFailed { .. } => "checks-failed",
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({ "error": self.kind(), "message": self.to_string(), "exit_code": self.exit_code() })
    }
}

pub(crate) fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Classifies foreign errors on the way out of a command.
pub(crate) trait Classify<T> {
    fn input(self) -> Result<T, CliError>;
    /// Input error that names the file it came from.
    fn input_at(self, path: &Path) -> Result<T, CliError>;
    fn internal(self) -> Result<T, CliError>;
}

impl<T, E: Display> Classify<T> for Result<T, E> {
    fn input(self) -> Result<T, CliError> {
        self.map_err(|e| CliError::Input(e.to_string()))
    }

    fn input_at(self, path: &Path) -> Result<T, CliError> {
        self.map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }

    fn internal(self) -> Result<T, CliError> {
        self.map_err(|e| CliError::Internal(e.to_string()))
    }
}
