use std::path::PathBuf;

use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] fsl_core::Error),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// 1 for numerical or statistical failures, 2 for anything wrong with the invocation itself.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(fsl_core::Error::Numeric { .. } | fsl_core::Error::DegenerateSample(_)) => 1,
            _ => 2,
        }
    }
}
