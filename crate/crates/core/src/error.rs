use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Caller passed a value outside an operation's precondition.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// Sampling coordinate outside the grid.
    #[error("coordinate ({x}, {y}) outside {width}x{height} grid")]
    Domain {
        x: f64,
        y: f64,
        width: usize,
        height: usize,
    },

    #[error("invalid parameters: {0}")]
    Parameter(String),

    #[error("state error: {0}")]
    State(String),

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("validation failed: {0}")]
    Validation(String),

    /// A pipeline stage needs an artifact that neither exists nor is scheduled.
    #[error("stage ordering: {0}")]
    Ordering(String),

    /// A test statistic is undefined for the supplied data (zero variance etc).
    #[error("degenerate statistic: {0}")]
    Degenerate(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Process exit status used by the `afv` binary.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } | Error::Format { .. } => 3,
            Error::Degenerate(_) => 4,
            _ => 2,
        }
    }
}
