use thiserror::Error;

/// Errors shared across the crate. The CLI maps these onto exit codes, so
/// variants are grouped by failure class rather than by module.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("capacity exceeded: {count} monomials (cap {cap})")]
    Capacity { count: u128, cap: usize },

    #[error("degree violation: {0}")]
    DegreeViolation(String),

    #[error("moment functional order too small: need {need}, have {have}")]
    OrderTooSmall { need: u32, have: u32 },

    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("instance is not explicitly bounded: {0}")]
    NotExplicitlyBounded(String),

    #[error("point is not strictly feasible: g_{index} evaluates to {value}")]
    NotStrict { index: usize, value: String },

    #[error("ball constraint too small for membership proofs: R^2 = {0} < 1")]
    BallTooSmall(String),

    #[error("solver produced no dual data: {0}")]
    MissingDual(String),

    #[error("infeasible or unbounded: {0}")]
    Infeasible(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub fn parse(line: usize, col: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            col,
            msg: msg.into(),
        }
    }
}
