use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("pattern length {got} does not match party count {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("all-zero sign pattern is not a valid term")]
    AllZeroPattern,

    #[error("party count {n} out of range [{min}, {max}]")]
    BadPartyCount { n: usize, min: usize, max: usize },

    #[error("term weight must be positive, got {0}")]
    NonPositiveWeight(String),

    #[error("bound must be positive, got {0}")]
    NonPositiveBound(String),

    #[error("duplicate sign pattern {0}")]
    DuplicatePattern(String),

    #[error("terms {first} and {second} both cover full sign string {string}")]
    Overlap {
        string: String,
        first: usize,
        second: usize,
    },

    #[error("merge block is not a complete set of 2^k sign siblings")]
    BlockIncomplete,

    #[error("merge block weights differ")]
    WeightMismatch,

    #[error("inequality has no extreme terms to drop")]
    ExtremesAbsent,

    #[error("draw budget exhausted after {draws} draws at mass {mass} of {target}")]
    BudgetExhausted {
        draws: u64,
        mass: u64,
        target: u64,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("state vector norm {0} too far from 1")]
    NotNormalized(f64),

    #[error("setting direction must be a unit vector, got norm {0}")]
    NotUnitVector(f64),

    #[error("eigenvalue iteration failed to converge within {budget} iterations")]
    ConvergenceFailure { budget: u64 },

    #[error("mixture probabilities must be positive and sum to 1")]
    BadMixture,

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Process exit code the CLI maps this error to.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Parse(_) => 3,
            _ => 1,
        }
    }
}
