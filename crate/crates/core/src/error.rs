use thiserror::Error;

/// Errors raised by measure construction, geometry and verification routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed measure input (bad dimension, zero direction, non-positive weight, ...).
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    /// A documented precondition of the operation does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// The measure is not isotropic/centered within the required tolerance.
    #[error("measure is not isotropic-centered: isotropy residual {isotropy_residual:e}, first moment norm {first_moment_norm:e} (tolerance {tolerance:e})")]
    NotIsotropic { isotropy_residual: f64, first_moment_norm: f64, tolerance: f64 },

    /// An argument lies outside the domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Weight solving did not produce an admissible measure.
    #[error("no feasible isotropic weights after {attempts} attempts (last residual {last_residual:e})")]
    Infeasible { attempts: usize, last_residual: f64 },

    /// Point set or face is lower dimensional than required.
    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    /// The polar body is unbounded (origin not interior to the hull).
    #[error("unbounded polar: {0}")]
    Unbounded(String),

    /// Polytope routines are capped at a maximal dimension.
    #[error("dimension {dim} exceeds supported maximum {max}")]
    DimensionTooLarge { dim: usize, max: usize },

    /// A function was required to be normalized in L1 and was not.
    #[error("normalization error: |t:Z|_1 = {0} (expected 1)")]
    Normalization(f64),

    #[error("support of size {size} exceeds brute-force limit {limit}")]
    SupportTooLarge { size: usize, limit: usize },

    #[error("serialization error: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}
