use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("operation requires n >= {required}, got n = {got}")]
    UnsupportedDimension { required: usize, got: usize },

    #[error("degenerate weight: {0}")]
    DegenerateWeight(String),

    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch { left: Vec<usize>, right: Vec<usize> },

    #[error("sampling failed: {0}")]
    Sampling(String),

    #[error("internal inconsistency: {0}")]
    Inconsistency(String),

    #[error("malformed {field}: {reason}")]
    Format { field: &'static str, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
