use dynardl_core::ErrorCategory;
use thiserror::Error;

/// Errors surfaced by the pipeline and the command-line front end.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration:\n  - {}", .0.join("\n  - "))]
    Config(Vec<String>),

    #[error(transparent)]
    Engine(#[from] dynardl_core::Error),

    #[error("artifact error: {0}")]
    Artifact(String),

    #[error("fetch error ({source_name}): {message}")]
    Fetch {
        source_name: String,
        message: String,
    },

    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn io(path: impl AsRef<std::path::Path>, e: impl std::fmt::Display) -> Self {
        CliError::Io {
            path: path.as_ref().display().to_string(),
            message: e.to_string(),
        }
    }

    pub fn category(&self) -> ErrorCategory {
        match self {
            CliError::Config(_) => ErrorCategory::Validation,
            CliError::Engine(e) => e.category(),
            CliError::Artifact(_) | CliError::Fetch { .. } | CliError::Io { .. } => {
                ErrorCategory::Data
            }
        }
    }

    /// Process exit status: 1 validation, 2 data, 3 numeric failure.
    pub fn exit_code(&self) -> i32 {
        match self.category() {
            ErrorCategory::Validation => 1,
            ErrorCategory::Data => 2,
            ErrorCategory::Numeric => 3,
        }
    }
}
