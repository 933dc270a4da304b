use std::path::PathBuf;

use thiserror::Error;
use usvwave_sim::SimError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid config `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("run failed: {0}")]
    Run(#[source] SimError),

    #[error("{path}: {reason}")]
    Plot { path: PathBuf, reason: String },
}

impl HarnessError {
    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        HarnessError::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| HarnessError::Io { path, source }
    }

    pub fn category(&self) -> &'static str {
        match self {
            HarnessError::Config { .. } => "config",
            HarnessError::Io { .. } => "io",
            HarnessError::InvalidArgument(_) => "argument",
            HarnessError::Run(_) => "run",
            HarnessError::Plot { .. } => "plot",
        }
    }

    /// Process exit code; 1 is left for panics and 2 for command-line usage errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config { .. } => 3,
            HarnessError::Io { .. } => 4,
            HarnessError::InvalidArgument(_) => 5,
            HarnessError::Run(_) => 6,
            HarnessError::Plot { .. } => 7,
        }
    }
}

impl From<SimError> for HarnessError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Config { key, reason } => HarnessError::Config { key, reason },
            SimError::Io { path, source } => HarnessError::Io { path, source },
            other => HarnessError::Run(other),
        }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
