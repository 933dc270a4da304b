use std::path::PathBuf;

use thiserror::Error;
use usvwave_core::CoreError;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid config `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("pitch {pitch} rad reached the Euler-angle singularity at t={t}")]
    GimbalSingularity { t: f64, pitch: f64 },

    #[error("at t={t}: {source}")]
    Core {
        t: f64,
        #[source]
        source: CoreError,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("run log line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

impl SimError {
    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        SimError::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn core(t: f64) -> impl FnOnce(CoreError) -> Self {
        move |source| SimError::Core { t, source }
    }
}

pub type Result<T, E = SimError> = std::result::Result<T, E>;
