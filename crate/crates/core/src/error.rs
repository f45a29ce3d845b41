use std::path::PathBuf;

/// Errors raised by the width computations and the experiment runner.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("linear algebra error: {message} (condition estimate {condition:e})")]
    LinearAlgebra { message: String, condition: f64 },

    #[error("truncation error: {0}; re-run with a larger truncation N")]
    Truncation(String),

    #[error("degenerate section: {0}")]
    Degenerate(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("numerical failure: {message} (residual {residual:e})")]
    Numerical { message: String, residual: f64 },

    #[error("capability error: {0}")]
    Capability(String),

    #[error("invariant violation: {0}")]
    Invariant(String),

    #[error("incompatible reports: {0}")]
    Incompatible(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 2 usage, 3 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Incompatible(_) | Error::Io { .. } | Error::Json(_) => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
