use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the numerical kernels and the operator/determinant layers.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite entry in input")]
    NonFinite,

    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },

    #[error("matrix is singular or nearly singular (smallest singular value {sigma_min:e})")]
    Singular { sigma_min: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported spatial dimension {0} (supported: 1, 2, 3)")]
    UnsupportedDimension(usize),

    #[error("point {0} lies on the essential spectrum")]
    OnSpectrum(Complex64),

    #[error("point {0} lies outside the open unit disc")]
    OutsideDisc(Complex64),

    #[error("dense dimension {dim} exceeds the configured cap {cap}")]
    TooLarge { dim: usize, cap: usize },

    #[error("integral diverges: {0}")]
    Divergent(String),

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("contour passes through or too close to a zero (|h'/h| = {0:e})")]
    ContourThroughZero(f64),

    #[error("winding number {0} is not within tolerance of an integer")]
    NonIntegerWinding(f64),

    #[error("search exhausted: {0}")]
    SearchExhausted(String),

    #[error("sequence does not fit any regime: {0}")]
    NoRegime(String),

    #[error("no data: {0}")]
    EmptyData(String),
}

pub type Result<T> = std::result::Result<T, Error>;
