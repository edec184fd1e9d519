use thiserror::Error;

/// Errors raised by the Walsh machinery.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum WalshError {
    #[error("base must be at least 2, got {0}")]
    InvalidBase(u32),
    #[error("base {0} is not allowed here: {1}")]
    UnsupportedBase(u32, &'static str),
    #[error("operation requires k > 0")]
    ZeroIndex,
    #[error("point {0} lies outside the domain {1}")]
    OutOfDomain(f64, &'static str),
    #[error("bases differ: {0} vs {1}")]
    BaseMismatch(u32, u32),
    #[error("polynomial degree {0} exceeds the configured maximum {1}")]
    DegreeOverflow(usize, usize),
    #[error("resolution b^{resolution} with b = {base} exceeds the cell cap {cap}")]
    ResolutionCap { base: u32, resolution: u32, cap: u64 },
    #[error("index {0} out of range: {1}")]
    OutOfRange(usize, String),
    #[error("need {needed} derivatives but the function provides {available}")]
    InsufficientDerivatives { needed: usize, available: usize },
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("dimension {0} exceeds the cap of {1}")]
    DimensionCap(usize, usize),
    #[error("Bernoulli degree {0} exceeds the cap {1}")]
    BernoulliCap(usize, usize),
    #[error("invalid norm exponent: {0}")]
    InvalidExponent(String),
    #[error("derivative check failed for order {order} at x = {x}: relative error {err:e}")]
    DerivativeCheck { order: usize, x: f64, err: f64 },
    #[error("not a member of the periodic space: integral of f^({0}) is {1:e}")]
    NotPeriodic(usize, f64),
    #[error("unknown theorem tag `{0}`")]
    UnknownTheorem(String),
    #[error("invalid function spec `{0}`: {1}")]
    FunctionSpec(String, String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, WalshError>;
