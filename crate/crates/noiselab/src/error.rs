use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, AppError>;

#[derive(Debug, Error)]
pub enum AppError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("config file not found: {}", .0.display())]
    MissingConfig(PathBuf),
    #[error("could not parse {what}: {msg}")]
    Schema { what: String, msg: String },
    #[error("resource guard: {0}")]
    Resource(String),
    #[error("io error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("output integrity: {0}")]
    Integrity(String),
    #[error(transparent)]
    Core(#[from] noiselab_core::Error),
}

impl AppError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io { path: path.into(), source }
    }

    /// Process exit code. 0, 1 and 3 are reserved for verdicts.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Validation(_) => 2,
            AppError::Resource(_) => 4,
            AppError::MissingConfig(_) => 5,
            AppError::Schema { .. } | AppError::Integrity(_) => 6,
            AppError::Io { .. } => 7,
            AppError::Core(e) => match e {
                noiselab_core::Error::Budget { .. } => 4,
                noiselab_core::Error::Quadrature { .. } => 4,
                _ => 2,
            },
        }
    }
}
