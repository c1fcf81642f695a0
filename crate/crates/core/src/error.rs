use thiserror::Error;

/// Errors raised by the kaon library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum KaonError {
    #[error("invalid constants: {0}")]
    InvalidConstants(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("negative time {0} (times are proper times in units of tau_S)")]
    NegativeTime(f64),

    #[error("state is not normalized (norm^2 = {0})")]
    NotNormalized(f64),

    #[error("zero vector cannot be normalized")]
    ZeroState,

    #[error("decoherence parameter {0} outside [0, 1]; use the extended range for fitting")]
    ZetaOutOfRange(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("probability {0} is negative beyond rounding tolerance")]
    NegativeProbability(f64),

    #[error("no data points")]
    NoData,

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("data parse error: {0}")]
    Parse(String),

    #[error("no violation anywhere in the searched bracket")]
    NoViolation,

    #[error("no sign change in bracket [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
}

pub type Result<T> = std::result::Result<T, KaonError>;
