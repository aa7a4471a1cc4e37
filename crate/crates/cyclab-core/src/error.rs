use thiserror::Error;

/// Errors shared by all library modules.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error(
        "sampled function is not bound to this measure (expected {expected} values, got {got})"
    )]
    BindingMismatch { expected: usize, got: usize },

    #[error("function vanishes at atom {index}")]
    ZeroAtAtom { index: usize },

    #[error("point lies outside the open unit disc (|w| = {modulus})")]
    OutsideDisc { modulus: f64 },

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid norm exponent p = {0}: p must be a positive finite number")]
    InvalidExponent(f64),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("level {level} out of range: decomposition has {levels} levels")]
    InvalidLevel { level: usize, levels: usize },

    #[error("{0}")]
    InvalidInput(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;
