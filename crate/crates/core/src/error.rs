use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("polynomial degree {degree} exceeds the cap {cap}")]
    DegreeOverflow { degree: usize, cap: usize },

    #[error("vector is not horizontal at the base point (|alpha0(p, v)| = {residual:e})")]
    NotHorizontal { residual: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid shell schedule at index {index}: {message}")]
    InvalidSchedule { index: usize, message: String },

    #[error("exponent selection failed for shell {index}: {binding} cannot hold below the cap {cap}")]
    SelectionFailed { index: usize, binding: String, cap: u64 },

    #[error("point left the representable range")]
    Escaped,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("config syntax error at line {line}, column {column}: {message}")]
    ConfigSyntax { line: usize, column: usize, message: String },

    #[error("invalid config field `{field}`: {message}")]
    ConfigField { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
