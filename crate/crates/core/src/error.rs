use thiserror::Error;

/// Errors raised by the toolkit.
///
/// The variants map onto the CLI exit codes: [`Error::Capacity`] → 3,
/// [`Error::Config`] → 2, [`Error::Invariant`] → 1.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("value out of range: {0}")]
    Range(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("trace is not 1 (got {0})")]
    InvalidTrace(f64),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("key stream exhausted: need {needed} bits at position {position}, {available} available")]
    KeyExhausted {
        needed: usize,
        position: usize,
        available: usize,
    },

    #[error("carrier does not match scheme variant: {0}")]
    CarrierMismatch(String),

    #[error("unknown variable `{0}` in joint table")]
    UnknownVariable(String),

    #[error("functional dependence violated: {0}")]
    FunctionalDependence(String),

    #[error("config error at `{field}`: {message}")]
    Config { field: String, message: String },
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
