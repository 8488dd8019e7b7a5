use std::path::PathBuf;

use thiserror::Error;

/// Process exit statuses.
pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("config {path}: {message}")]
    Config { path: PathBuf, message: String },

    #[error("missing artifact {path}; run `burnnet {producer}` first")]
    MissingArtifact { path: PathBuf, producer: &'static str },

    #[error("malformed artifact {path}: {message}")]
    Artifact { path: PathBuf, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] burnnet::Error),
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        use burnnet::Error as E;
        match self {
            CliError::Usage(_) | CliError::Config { .. } => EXIT_USAGE,
            CliError::MissingArtifact { .. } | CliError::Artifact { .. } | CliError::Io { .. } => EXIT_DATA,
            CliError::Core(e) => match e {
                E::InvalidArgument(_) => EXIT_USAGE,
                E::Numerical(_) => EXIT_NUMERICAL,
                E::ShapeMismatch { .. } | E::Data(_) | E::Io { .. } | E::Image { .. } => EXIT_DATA,
            },
        }
    }
}
