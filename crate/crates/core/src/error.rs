use thiserror::Error;

/// Errors raised by the numerical kernels and circuit builders.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("logistic solution diverges at t = {t} (R = {ratio} >= 1)")]
    LogisticBlowUp { t: f64, ratio: f64 },
    #[error("{what} became non-finite at step {step}")]
    NonFinite { what: &'static str, step: usize },
    #[error("every site is below the relative-error guard at step {step}")]
    DegenerateError { step: usize },
    #[error("matrix size {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("{what} = {value} exceeds the supported cap of {cap}")]
    CapExceeded {
        what: &'static str,
        value: usize,
        cap: usize,
    },
    #[error("index {index} out of range (limit {limit})")]
    OutOfRange { index: usize, limit: usize },
    #[error("block encoding not applicable: {0}")]
    NotApplicable(String),
    #[error("invalid gate: {0}")]
    InvalidGate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
