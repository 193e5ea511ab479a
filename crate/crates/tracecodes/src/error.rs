use thiserror::Error;

/// Errors produced by the library. `Precondition` failures map to CLI exit
/// code 2, `BoundViolation` to exit code 1.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NonPrime(u64),
    #[error("modulus is reducible over F_{p}")]
    ReducibleModulus { p: u64 },
    #[error("modulus must be monic of degree {expected}, got degree {got}")]
    BadModulus { expected: usize, got: usize },
    #[error("discrete log of zero is undefined")]
    ZeroLog,
    #[error("division by zero")]
    DivisionByZero,
    #[error("elements belong to different field specs")]
    MismatchedField,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("bound violated: {0}")]
    BoundViolation(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn precondition(msg: impl Into<String>) -> Error {
    Error::Precondition(msg.into())
}
