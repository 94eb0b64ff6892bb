//! Error type shared across the engine.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SgfError {
    /// Malformed text input (edge lists, filter strings, config files).
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// An index or id outside its declared range.
    #[error("bounds error: {0}")]
    Bounds(String),

    /// Matrix/vector shape mismatch.
    #[error("shape error: {0}")]
    Shape(String),

    /// A numeric parameter outside its admissible domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// An inconsistent or incomplete filter/run description.
    #[error("validation error: {0}")]
    Validation(String),

    /// A computation that failed to converge or produced non-finite values.
    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// File with an unrecognised magic tag or inconsistent header.
    #[error("format error in {path}: {msg}")]
    Format { path: String, msg: String },
}

impl SgfError {
    /// Process exit code class: 2 for anything the caller got wrong, 3 for
    /// numerical failures discovered mid-computation.
    pub fn exit_code(&self) -> i32 {
        match self {
            SgfError::Numeric(_) => 3,
            _ => 2,
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        SgfError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, SgfError>;
