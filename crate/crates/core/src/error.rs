use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid interval [{start}, {end}]: length must be positive, finite and > 1e-12")]
    InvalidInterval { start: f64, end: f64 },

    #[error("point {point} lies outside [{start}, {end}]")]
    OutOfDomain { point: f64, start: f64, end: f64 },

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("multi-index arity {got} does not match kernel multiplicity {expected}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("capacity guard exceeded: {0}")]
    CapacityExceeded(String),

    #[error("unsupported multiplicity {0} (supported: 1..=4)")]
    UnsupportedMultiplicity(usize),

    #[error("outside theorem hypotheses: {0}")]
    TheoremRestriction(String),

    #[error("unsupported catalog entry: {0}")]
    UnsupportedCatalogEntry(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("numerical check failed: {0}")]
    Numerical(String),

    #[error("mean-square error bound is only stated for component indices >= 1, or for T - t < 1")]
    BoundNotStated,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
