use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid group parameters: {0}")]
    InvalidGroup(String),

    #[error("group closure exceeded max_order = {limit}")]
    SizeLimit { limit: usize },

    #[error("dedup key collision: distinct matrices share a key (max difference {diff:e})")]
    KeyCollision { diff: f64 },

    #[error("representation is degenerate: {0}")]
    Degenerate(String),

    #[error("zero vector cannot define a line")]
    ZeroVector,

    #[error("orbit consistency error: {0}")]
    Inconsistent(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("field mismatch: {0}")]
    FieldMismatch(String),

    #[error("numeric range error: {0}")]
    NumericRange(String),

    #[error("no real root: {0}")]
    NoRoots(String),

    #[error("certificate schema error: {0}")]
    Schema(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
