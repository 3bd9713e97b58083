use std::path::{Path, PathBuf};

use leafkit_core::Error as CoreError;
use thiserror::Error;

/// Failures of a CLI run, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("{path}:{line}:{column}: {message}")]
    Config { path: String, line: usize, column: usize, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {detail}", path.display())]
    BadInput { path: PathBuf, detail: String },

    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: CoreError,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config { .. } => 1,
            CliError::Io { .. } | CliError::BadInput { .. } => 3,
            CliError::Core { source, .. } => match source {
                CoreError::RankDeficient { .. }
                | CoreError::DegenerateStateHamiltonian { .. }
                | CoreError::NumericalError(_)
                | CoreError::EmptyShell { .. } => 2,
                CoreError::Io(_) | CoreError::Format { .. } => 3,
                CoreError::InvalidOperator(_) | CoreError::DomainError(_) | CoreError::InvalidParameter(_) => 1,
            },
        }
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Attaches a context string to core errors.
pub(crate) trait Context<T> {
    fn context(self, what: impl FnOnce() -> String) -> CliResult<T>;
}

impl<T> Context<T> for leafkit_core::Result<T> {
    fn context(self, what: impl FnOnce() -> String) -> CliResult<T> {
        self.map_err(|source| CliError::Core { context: what(), source })
    }
}
