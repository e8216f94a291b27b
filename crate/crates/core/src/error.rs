use thiserror::Error;

/// Errors raised by the allocation, scheduling and channel routines.
#[derive(Debug, Error)]
pub enum DrsError {
    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("operation requires equal per-user powers")]
    AsymmetricPowers,

    #[error("operation requires a symmetric channel (equal conditional mutual information across equal-size user sets)")]
    AsymmetricChannel,

    #[error("number of levels must be at least 1")]
    ZeroLevels,

    #[error("invalid power split: {0}")]
    InvalidSplit(String),

    #[error("invalid switch distribution: {0}")]
    InvalidSwitch(String),

    #[error("counts must be ≥ 1")]
    ZeroCount,

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("bisection bracket lost: f({lo}) = {f_lo}, f({hi}) = {f_hi}")]
    Bracketing { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("channel file: {0}")]
    Parse(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, DrsError>;
