use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("distribution is not interior: weight {index} is {weight}")]
    NotInterior { index: usize, weight: f64 },

    #[error("invalid simplex delta: components sum to {sum}")]
    InvalidDelta { sum: f64 },

    #[error("lattice of {size} points exceeds the cap of {cap}")]
    LatticeCapExceeded { size: u128, cap: u64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("index {index} out of range for {len} {what}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("invalid loss matrix: {0}")]
    InvalidLoss(String),

    #[error("solver did not converge after {iterations} iterations, bracket [{lo}, {hi}]")]
    NoConvergence { iterations: usize, lo: f64, hi: f64 },

    #[error("containment condition violated: sqrt(radius) = {lhs} >= {rhs}")]
    ConditionViolated { lhs: f64, rhs: f64 },

    #[error("matrix is singular or not positive definite")]
    SingularMatrix,

    #[error("support of the target is not contained in the support of the shift (scenario {index})")]
    SupportViolation { index: usize },

    #[error("schedule has no value for T = {0}")]
    ScheduleUndefined(u64),

    #[error("estimate too imprecise at T = {t}: relative error {relative_error}")]
    Imprecise { t: u64, relative_error: f64 },

    #[error("scenario file parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("scenario validation failed: {0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
