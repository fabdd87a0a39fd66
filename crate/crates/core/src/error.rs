use thiserror::Error;

use crate::model::BasisTag;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("deformation c must be real, got imaginary part {0}")]
    ComplexDeformation(f64),

    #[error("basis mismatch: expected {expected:?}, found {found:?}")]
    BasisMismatch { expected: BasisTag, found: BasisTag },

    #[error("operation not available in basis {0:?}")]
    UnsupportedBasis(BasisTag),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("critical points nearly coincide (min distance {min_distance:e})")]
    IllConditioned { min_distance: f64 },

    #[error("matrix is singular: {0}")]
    Singular(String),

    #[error("degenerate eigen-splitting: B_n(c) = {0:e}")]
    DegenerateSplitting(f64),

    #[error("cannot take n-th root of a vanishing eigenvalue")]
    ZeroEigenvalue,

    #[error("internal inconsistency: {0}")]
    Inconsistent(String),

    #[error("block is not diagonal (off-diagonal magnitude {0:e})")]
    NotDiagonal(f64),

    #[error("metric block at j={j}, point {point} is not positive definite")]
    NotPositiveDefinite { j: usize, point: usize },

    #[error("solver diverged after {iterations} iterations (residual {residual:e})")]
    Diverged { iterations: usize, residual: f64 },

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
