use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("config error: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    Numerical {
        context: String,
        #[source]
        source: discern_core::Error,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, ExperimentError>;

impl ExperimentError {
    /// Process exit code: 2 for configuration and input problems, 3 for
    /// numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Config(_) | ExperimentError::Io { .. } => 2,
            ExperimentError::Numerical { .. } => 3,
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        ExperimentError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn core(context: impl Into<String>, source: discern_core::Error) -> Self {
        if source.is_config_error() {
            return ExperimentError::Config(format!("{}: {source}", context.into()));
        }
        match source {
            discern_core::Error::Io(e) => ExperimentError::Io {
                path: context.into(),
                source: e,
            },
            other => ExperimentError::Numerical {
                context: context.into(),
                source: other,
            },
        }
    }
}

/// Attach context to core results.
pub trait Context<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T>;
}

impl<T> Context<T> for discern_core::Result<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T> {
        self.map_err(|e| ExperimentError::core(what(), e))
    }
}
