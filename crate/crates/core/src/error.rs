use thiserror::Error;

/// Errors raised by the fingerprint pipeline.
///
/// Variants split into two families that the command-line front end maps to
/// different exit codes: input/validation problems and computation failures.
#[derive(Debug, Error)]
pub enum TmpError {
    #[error("line {line}: {message}")]
    Ingest { line: u64, message: String },

    #[error("{0}")]
    Validation(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("malformed file: {0}")]
    Format(String),

    #[error("internal consistency failure: {0}")]
    Consistency(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl TmpError {
    pub fn validation(msg: impl Into<String>) -> Self {
        TmpError::Validation(msg.into())
    }

    pub fn contract(msg: impl Into<String>) -> Self {
        TmpError::Contract(msg.into())
    }

    /// True for errors caused by the caller's input rather than by the
    /// computation itself.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            TmpError::Ingest { .. }
                | TmpError::Validation(_)
                | TmpError::Contract(_)
                | TmpError::Shape(_)
                | TmpError::Format(_)
                | TmpError::Json(_)
        )
    }
}

pub type Result<T, E = TmpError> = std::result::Result<T, E>;
