use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the ranking, selection and fusion routines.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is out of its admissible range.
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    /// Malformed input file or in-memory structure.
    #[error("format error: {0}")]
    Format(String),

    /// A numeric precondition does not hold (zero variance, empty input, ...).
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Two inputs that must describe the same collection do not.
    #[error("mismatch: {0}")]
    Mismatch(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
