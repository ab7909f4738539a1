use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("pair ({u}, {v}) cannot be stepped: values are equal")]
    EqualPair { u: u64, v: u64 },

    #[error("input {0} exceeds the supported range (< 2^62)")]
    TooLarge(u64),

    #[error("cost function `{name}` is not regular: c({branch},{k}) = {value} exceeds {bound}*k")]
    IrregularCost { name: String, branch: u8, k: u32, value: f64, bound: f64 },

    #[error("invalid cost function: {0}")]
    InvalidCost(String),

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("point {x} lies outside the grid range [{lo}, {hi}]")]
    OutOfRange { x: f64, lo: f64, hi: f64 },

    #[error("iteration did not converge after {iterations} steps (last delta {last_delta:e})")]
    NonConvergence { iterations: usize, last_delta: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("arithmetic overflow: {0}")]
    Overflow(String),

    #[error("unknown weight `{0}`")]
    UnknownWeight(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
