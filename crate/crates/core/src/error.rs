use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the simulation engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("tensor is not symmetric: max |M - M^T| = {0:e}")]
    Asymmetric(f64),

    #[error("tensor is not traceless: |trace| = {0:e}")]
    NotTraceless(f64),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch between operands")]
    GridMismatch,

    #[error("inverse transform lost Hermitian symmetry: imaginary residual {residual:e} exceeds {limit:e}")]
    BrokenHermitian { residual: f64, limit: f64 },

    #[error("wavevector must be nonzero to build a local frame")]
    ZeroWavevector,

    #[error("phi table was built for tau = {built} but tau = {requested} was requested")]
    PhiTableMismatch { built: f64, requested: f64 },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("stabilization rejected:\n{0}")]
    Stabilization(String),

    #[error("dense oracle limited to {limit}, got {got}")]
    OracleTooLarge { limit: usize, got: usize },

    #[error("config error in `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("snapshot {path}: {reason}")]
    Snapshot { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
