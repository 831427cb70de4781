use std::io;
use std::path::PathBuf;

use crate::config::ConfigError;

/// Process exit status for each failure class.
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_VERIFICATION: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: io::Error },
    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: io::Error },
    #[error("numerical failure: {0}")]
    Numerical(disentangle_core::Error),
    #[error("{failed} of {total} checks failed")]
    Verification { failed: usize, total: usize },
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Config(_) | AppError::Read { .. } | AppError::Write { .. } => EXIT_CONFIG,
            AppError::Numerical(_) => EXIT_NUMERICAL,
            AppError::Verification { .. } => EXIT_VERIFICATION,
        }
    }

    pub(crate) fn write(path: impl Into<PathBuf>) -> impl FnOnce(io::Error) -> AppError {
        let path = path.into();
        move |source| AppError::Write { path, source }
    }
}

/// Core errors during a run are numerical unless they are configuration
/// errors the validator missed.
impl From<disentangle_core::Error> for AppError {
    fn from(e: disentangle_core::Error) -> Self {
        match e {
            disentangle_core::Error::NumericalFailure { .. } => AppError::Numerical(e),
            other => AppError::Config(ConfigError::new("config", other.to_string())),
        }
    }
}
