use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters (alpha = {alpha}, d = {d}): {reason}")]
    InvalidParams {
        alpha: f64,
        d: f64,
        reason: &'static str,
    },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("{what} = {value} is outside the supported range [{min}, {max}]")]
    OutOfRange {
        what: &'static str,
        value: usize,
        min: usize,
        max: usize,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("stick-breaking exceeded the cap of {0} sticks")]
    StickCap(usize),

    #[error("stick index beyond {0:e}; the discount is too close to 1 for this draw")]
    StickIndexOverflow(f64),

    #[error("mismatched input: {0}")]
    Mismatch(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
