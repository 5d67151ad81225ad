use std::path::PathBuf;

use crate::config::ConfigError;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error at {0}")]
    Config(#[from] ConfigError),

    #[error(transparent)]
    Core(#[from] wishart_core::Error),

    #[error("{method}: {failed} of {total} grid points did not converge (allowed fraction {allowed})")]
    NonConvergence {
        method: String,
        failed: usize,
        total: usize,
        allowed: f64,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed output document: {0}")]
    Format(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// Input problems map to the config code; every other core failure is numerical.
    pub fn exit_code(&self) -> i32 {
        use wishart_core::Error as E;
        match self {
            Self::Config(_) => EXIT_CONFIG,
            Self::Core(E::InvalidInput(_) | E::Domain(_) | E::InvalidLaw(_)) => EXIT_CONFIG,
            Self::Core(_) | Self::NonConvergence { .. } => EXIT_NUMERICAL,
            Self::Io { .. } | Self::Format(_) => EXIT_IO,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::Format(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::Format(e.to_string())
    }
}
