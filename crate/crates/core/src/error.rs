use thiserror::Error;

use crate::features::FeatureId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("channel `{name}` has {len} samples, need at least {min}")]
    TooShort { name: String, len: usize, min: usize },

    #[error("derivative order must be 1, 2 or 3, got {0}")]
    InvalidOrder(u8),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid trial `{id}`: {violations}")]
    InvalidTrial { id: String, violations: String },

    #[error("feature {id} could not be computed: {reason}")]
    Feature { id: FeatureId, reason: String },

    #[error("normalization needs at least one training row")]
    EmptyTrainingSet,

    #[error("need at least {need} rows of class {class}, got {got}")]
    TooFewRows {
        class: &'static str,
        need: usize,
        got: usize,
    },

    #[error("k = {k} exceeds the {available} available {what}")]
    KTooLarge {
        k: usize,
        available: usize,
        what: &'static str,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("SMO did not converge after {iterations} iterations (KKT gap {gap:.3e}, tolerance {tolerance:.1e})")]
    NoConvergence {
        iterations: usize,
        gap: f64,
        tolerance: f64,
    },

    #[error("cannot split: {0}")]
    Split(String),

    #[error("EER needs both classes among the scores")]
    OneClass,

    #[error("missing grid cells: {0}")]
    MissingCells(String),

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: String,
        line: u64,
        message: String,
    },

    #[error("{path}: {message}")]
    Schema { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
