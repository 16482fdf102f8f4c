use std::path::PathBuf;

use thiserror::Error;

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_FORMAT: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: hyperrank::Error,
    },
    #[error("{0}")]
    Core(#[from] hyperrank::Error),
    #[error("cannot write {}: {source}", path.display())]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        let core = match self {
            CliError::Usage(_) => return EXIT_USAGE,
            CliError::Write { .. } | CliError::Csv { .. } => return EXIT_FORMAT,
            CliError::Stage { source, .. } | CliError::Core(source) => source,
        };
        match core {
            hyperrank::Error::Parameter { .. } => EXIT_USAGE,
            hyperrank::Error::Numeric(_) => EXIT_NUMERIC,
            hyperrank::Error::Format(_) | hyperrank::Error::Mismatch(_) | hyperrank::Error::Io { .. } => {
                EXIT_FORMAT
            }
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

/// Attach a stage name to core errors.
pub trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for hyperrank::Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|source| CliError::Stage { stage, source })
    }
}
