use std::path::PathBuf;

use dsfm_core::DsfmError;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, HarnessError>;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] DsfmError),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("image: {0}")]
    Image(String),

    #[error("config: {0}")]
    Config(String),
}

impl HarnessError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn category(&self) -> &'static str {
        match self {
            HarnessError::Core(e) => e.category(),
            HarnessError::Parse { .. } => "parse",
            HarnessError::Io { .. } => "io",
            HarnessError::Image(_) => "image",
            HarnessError::Config(_) => "config",
        }
    }

    /// Process exit code for this error category.
    pub fn exit_code(&self) -> i32 {
        match self.category() {
            "input" | "parse" | "config" => 2,
            "io" | "image" => 3,
            "not_submodular" => 4,
            "oracle_exactness" => 5,
            "convergence" => 6,
            "capability" => 7,
            _ => 70,
        }
    }
}
