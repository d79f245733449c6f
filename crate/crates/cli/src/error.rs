use std::path::{Path, PathBuf};
use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    /// Scenario or input file failed schema or parameter validation.
    #[error("validation error: {0}")]
    Validation(String),

    /// A physical or numerical precondition failed while running.
    #[error("physics error in {stage}: {source}")]
    Physics {
        stage: &'static str,
        #[source]
        source: heitler_core::Error,
    },

    #[error("i/o error at {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Physics { .. } => 3,
            CliError::Io { .. } => 4,
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Classify a core error raised while reading `path`.
    pub fn from_input(path: &Path, e: heitler_core::Error) -> Self {
        match e {
            heitler_core::Error::Io(source) => CliError::io(path, source),
            other => CliError::Validation(format!("{}: {other}", path.display())),
        }
    }
}

/// Attach a pipeline stage name to core failures.
pub trait Stage<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> Stage<T> for heitler_core::Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|source| CliError::Physics { stage, source })
    }
}
