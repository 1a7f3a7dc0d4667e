use thiserror::Error;

pub type Result<T> = std::result::Result<T, HdxError>;

#[derive(Debug, Error)]
pub enum HdxError {
    #[error("division by zero in GF({0})")]
    DivisionByZero(u32),

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: String, got: String },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("{what} needs {needed} but the budget is {limit}")]
    Budget { what: String, needed: u128, limit: u128 },

    /// An internal consistency check failed; indicates an arithmetic bug
    /// rather than bad input.
    #[error("construction aborted: {0}")]
    Inconsistent(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl HdxError {
    pub(crate) fn shape(expected: impl ToString, got: impl ToString) -> Self {
        HdxError::Shape {
            expected: expected.to_string(),
            got: got.to_string(),
        }
    }

    pub(crate) fn budget(what: impl Into<String>, needed: u128, limit: u128) -> Self {
        HdxError::Budget {
            what: what.into(),
            needed,
            limit,
        }
    }
}
