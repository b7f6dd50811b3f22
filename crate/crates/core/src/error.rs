//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by any simulator component.
#[derive(Debug, Error)]
pub enum Error {
    /// Trace-file parse failure; carries the 1-based line number.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// I/O failure with the path involved.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// A parameter or argument violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Window or index out of the valid range.
    #[error("out of range: {0}")]
    Range(String),

    /// A model was applied to data it was not trained for.
    #[error("model mismatch: {0}")]
    ModelMismatch(String),

    /// Illegal state-machine transition.
    #[error("illegal transition: {event} in {phase}")]
    Transition { phase: String, event: String },

    /// Notice-model calibration failed to converge; residuals are
    /// (scenario tag, achieved − target) pairs.
    #[error("calibration did not converge: residuals {residuals:?}")]
    Calibration { residuals: Vec<(char, f64)> },

    /// Keyword capture used before all needed units were collected.
    #[error("capture incomplete: missing {missing:?}")]
    CaptureIncomplete { missing: Vec<String> },

    /// Model or config JSON failure.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
