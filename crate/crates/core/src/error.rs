use thiserror::Error;

/// Errors raised across the laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ZollError {
    #[error("invalid profile: {0}")]
    ProfileInvalid(String),

    #[error("evaluation at theta = {theta} lies inside the pole guard band")]
    PoleEvaluation { theta: f64 },

    #[error("step size underflow at arclength {s} (h = {h:e})")]
    StepUnderflow { s: f64, h: f64 },

    #[error("no connecting geodesic found after {directions} shooting directions")]
    NoConnectionFound { directions: usize },

    #[error("metric {hash} has no passing Zoll certification; run `certify` first")]
    NotCertifiedZoll { hash: String },

    #[error("value {value} is not an integer multiple of 2*pi")]
    NotMultipleOf2Pi { value: f64 },

    #[error("curve collapsed to length {length:e} after {rounds} rounds")]
    CollapseDetected { length: f64, rounds: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for ZollError {
    fn from(e: std::io::Error) -> Self {
        ZollError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, ZollError>;
