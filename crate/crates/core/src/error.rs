use thiserror::Error;

/// Everything that can go wrong inside the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("indeterminate extended-real sum (+inf) + (-inf)")]
    IndeterminateSum,

    #[error("NaN is not an extended real")]
    NotANumber,

    #[error("non-finite coordinate {value} at index {index}")]
    NonFiniteCoordinate { index: usize, value: f64 },

    #[error("points must have positive dimension")]
    EmptyPoint,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("subderivative requested at a point where the objective is not finite")]
    DomainViolation,

    #[error("scale factor must be positive, got {0}")]
    NonpositiveScale(f64),

    #[error("combinator needs at least one member")]
    EmptyList,

    #[error("set model returned no nearest point")]
    EmptyProjection,

    #[error("no closed-form proximal map for this inner function: {0}")]
    ProxUnavailable(String),

    #[error("model exposes no gradient at this point")]
    NoGradient,

    #[error("model declares no separable subderivative structure at this point")]
    NotSeparable,

    #[error("Armijo backtracking exhausted after {backtracks} reductions")]
    BacktrackExhausted { backtracks: usize },

    #[error("audit asked for N = {requested} but trace has {available} steps")]
    InsufficientTrace { requested: usize, available: usize },

    #[error("brute-force search limited to dimension <= {max}, got {found}")]
    DimensionTooLarge { max: usize, found: usize },

    #[error("mapped point is not in the set")]
    NotFeasible,

    #[error("subderivative is -inf; the objective is not calm from below here")]
    NegInfSubderivative,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },

    #[error("parse error in {path} line {line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
