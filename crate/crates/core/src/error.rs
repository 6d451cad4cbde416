use std::path::PathBuf;

use thiserror::Error;

use crate::dynamics::ShearFrameState;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: expected {expected}, got {found}")]
    GridMismatch { expected: String, found: String },

    #[error("non-finite value at collocation point ({ix}, {iy})")]
    NonFinite { ix: usize, iy: usize },

    #[error("hermitian symmetry violated: relative defect {defect:.3e}")]
    HermitianViolation { defect: f64 },

    #[error("field has a nonzero mean mode (|coef(0,0)| = {magnitude:.3e})")]
    NonzeroMean { magnitude: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("fit needs at least {needed} samples in window, found {found}")]
    InsufficientSamples { needed: usize, found: usize },

    #[error("nonpositive value {value} at t = {t} in fit window")]
    NonPositiveValue { t: f64, value: f64 },

    #[error("time series is not increasing at index {index}")]
    NonMonotoneTime { index: usize },

    #[error("numerical failure at t = {t}: {reason}")]
    Numerical {
        t: f64,
        reason: String,
        last_valid: Box<ShearFrameState>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
