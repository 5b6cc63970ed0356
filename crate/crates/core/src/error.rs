use thiserror::Error;

/// Errors raised by the metric laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite coordinate in {0}")]
    NonFinite(&'static str),

    #[error("empty coordinate list")]
    Empty,

    #[error("unknown domain descriptor `{0}`")]
    UnknownDescriptor(String),

    #[error("invalid domain descriptor: {0}")]
    InvalidDescriptor(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point {0} is not inside the domain")]
    NotInDomain(String),

    #[error("oracle not available: {0}")]
    OracleUnsupported(String),

    #[error("gauge is not a complete Reinhardt gauge in C^2")]
    NotReinhardt,

    #[error("sample exits the domain after {0} retries")]
    SampleExhausted(usize),

    #[error("bound {0} is not below 1; tanh^-1 is undefined")]
    VacuousBound(f64),

    #[error("no singular line within hop radius {radius} of {point}")]
    NoSingularLine { point: String, radius: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
