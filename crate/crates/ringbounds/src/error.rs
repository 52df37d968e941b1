//! Error type shared by all modules.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by geometry validation, quadrature, and the bound
/// evaluators.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Dimension outside the supported range.
    #[error("invalid dimension n = {n}: {reason}")]
    InvalidDimension { n: i64, reason: &'static str },

    /// Parameter pair (n, p) rejected at construction.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// A bound was requested outside the exponent regime it is stated for.
    /// `context` names the bound, `violated` the failed inequality.
    #[error("{context}: regime mismatch, {violated}")]
    RegimeMismatch { context: String, violated: String },

    /// Ring with r1 >= r2 or nonpositive radii.
    #[error("degenerate ring: {0}")]
    DegenerateRing(String),

    /// Argument outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// 1D integrand evaluated to a non-finite value.
    #[error("non-finite integrand value {value} at x = {x}")]
    NonFiniteValue { x: f64, value: f64 },

    /// Weight evaluator returned NaN at a sample point.
    #[error("weight evaluated to NaN at sample point {point:?}")]
    NanSample { point: Vec<f64> },

    /// Iteration or evaluation budget exhausted without reaching tolerance.
    #[error("did not converge: {0}")]
    NotConverged(String),

    /// A growth hypothesis required by a bound does not hold.
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    /// The extremal density is undefined (I = 0 or I = infinity).
    #[error("extremal density undefined: {0}")]
    ExtremalUndefined(String),

    /// Configuration file or flag rejected.
    #[error("config error at {location}: {message}")]
    Config { location: String, message: String },
}

impl Error {
    /// Process exit code for the CLI: 1 usage/config, 2 hypothesis
    /// violations, 3 numerical non-convergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::HypothesisViolated(_) => 2,
            Error::NotConverged(_) => 3,
            _ => 1,
        }
    }
}
