use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid tree shape: {0}")]
    InvalidTree(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("cube {0} is a leaf and has no children")]
    NoChildren(u32),

    #[error("cube {0} has zero measure, ratio undefined")]
    ZeroMeasureCube(u32),

    #[error("collection is not connected under inclusion")]
    NotConnected,

    #[error("measure is not doubling on the collection")]
    NotDoubling,

    #[error("operator tagged p = {0}, operation requires p = 2")]
    NotP2(f64),

    #[error("{0} leaves exceed the dense-matrix limit of {1}")]
    TooLargeForDense(usize, usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
