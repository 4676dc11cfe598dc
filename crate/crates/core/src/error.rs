use std::io;

use thiserror::Error;

/// Errors produced by the simplex tensor library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension n = {0}: the simplex frame needs n >= 2")]
    InvalidDimension(usize),

    #[error("invalid tensor order d = {0}: expected d >= 2")]
    InvalidOrder(usize),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dense tensor would hold {size} entries, above the limit of {limit}")]
    Capacity { size: u128, limit: u128 },

    #[error("power map undefined: |T x^(d-1)| = {norm:e} is below threshold")]
    MapUndefined { norm: f64 },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("eigenpair residual {residual:e} exceeds {limit:e}")]
    Residual { residual: f64, limit: f64 },

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
