use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not positive definite: minimal eigenvalue {min_eigenvalue:e} is not above tolerance {tolerance:e}")]
    NotPositiveDefinite { min_eigenvalue: f64, tolerance: f64 },

    #[error("skew-block shape requires an even sample count, got n = {0}")]
    ShapeParity(usize),

    #[error("division by zero: {0}")]
    DivisionByZero(String),

    /// Trace normalization `Tr(B_n) / n = 1` (or a common scaled trace) is violated.
    #[error("trace normalization violated at n = {n}: Tr(B)/n = {scaled_trace} (expected {expected})")]
    AssumptionViolation {
        n: usize,
        scaled_trace: f64,
        expected: f64,
    },

    #[error("enumeration cap exceeded: p = {p} > {cap} would produce {count} vectors")]
    EnumerationCap { p: usize, cap: usize, count: u128 },

    #[error("target not achievable with n <= {cap}: value at cap is {value_at_cap}")]
    NotAchievable { cap: u64, value_at_cap: f64 },

    #[error("invalid net: {0}")]
    InvalidNet(String),

    #[error("check requires a whitened model (theta = I); sample with theta = I and conjugate by theta^(1/2) afterwards")]
    NotWhitened,

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by a resource cap rather than bad input.
    pub fn is_cap(&self) -> bool {
        matches!(self, Error::EnumerationCap { .. } | Error::NotAchievable { .. })
    }
}
