use thiserror::Error;

/// Errors surfaced by kernel, network, and decomposition operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("zero kernel has no extremal input")]
    ZeroKernel,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid envelope: {0}")]
    InvalidEnvelope(String),

    #[error("infinite complexity constant: {0}")]
    InfiniteComplexity(String),

    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
