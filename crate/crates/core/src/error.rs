use thiserror::Error;

/// Errors raised by the simulation and analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("index {index} out of range (length {length})")]
    OutOfRange { index: usize, length: usize },

    #[error("noise path too short: need {needed} increments, have {available}")]
    InsufficientPath { needed: usize, available: usize },

    #[error("numerical blow-up at step {step} (t = {time}): state ({x}, {y})")]
    BlowUp {
        step: usize,
        time: f64,
        x: f64,
        y: f64,
    },

    #[error("series has zero variance")]
    FlatSeries,

    #[error("series too short: {length} samples, need at least {minimum}")]
    SeriesTooShort { length: usize, minimum: usize },

    #[error("jump process absorbed: total propensity is zero")]
    Absorbed,

    #[error("event cap of {cap} reactions reached before t = {t_end}")]
    EventCap { cap: usize, t_end: f64 },

    #[error("malformed noise dump: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures that come from the numerics rather than from input
    /// validation.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::BlowUp { .. } | Error::Absorbed | Error::EventCap { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
