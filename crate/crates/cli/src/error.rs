use std::path::PathBuf;

use thiserror::Error;

/// Exit status for a successful run.
pub const EXIT_OK: i32 = 0;
/// Exit status for I/O trouble outside the validation and numerics classes.
pub const EXIT_IO: i32 = 1;
/// Exit status for configuration and validation failures.
pub const EXIT_VALIDATION: i32 = 2;
/// Exit status for numerical aborts (explosion guard, energy increase, ...).
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot parse {path}: {message}")]
    Config { path: PathBuf, message: String },

    #[error("invalid configuration: {0}")]
    Validation(String),

    #[error(transparent)]
    Core(#[from] selfdiff_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("plot input: {0}")]
    PlotInput(String),

    #[error("thread pool: {0}")]
    Threads(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use selfdiff_core::Error as E;
        match self {
            Self::Config { .. } | Self::Validation(_) | Self::PlotInput(_) | Self::Threads(_) => {
                EXIT_VALIDATION
            }
            Self::Io { .. } => EXIT_IO,
            Self::Core(e) => match e {
                E::InvalidArgument { .. } | E::Parse(_) => EXIT_VALIDATION,
                E::Io(_) | E::Csv(_) => EXIT_IO,
                _ => EXIT_NUMERICAL,
            },
        }
    }
}
