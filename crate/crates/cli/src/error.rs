use std::path::PathBuf;
use thiserror::Error;

/// Exit code for a precondition or input failure.
pub const EXIT_PRECONDITION: i32 = 2;
/// Exit code when a checked bound is violated with assertions enabled.
pub const EXIT_ASSERTION: i32 = 3;
/// Exit code for internal inconsistencies.
pub const EXIT_INTERNAL: i32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] clustercert::Error),

    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed input file; the message names the offending row or field.
    #[error("{path}: {message}")]
    Input { path: PathBuf, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),

    #[error("json encoding failed: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(clustercert::Error::Internal(_)) => EXIT_INTERNAL,
            _ => EXIT_PRECONDITION,
        }
    }

    pub(crate) fn input(path: &std::path::Path, message: impl Into<String>) -> Self {
        CliError::Input {
            path: path.to_path_buf(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
