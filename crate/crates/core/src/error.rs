use thiserror::Error;

/// Errors raised by the library.
///
/// Input errors describe bad data handed to a public entry point. Logic
/// errors (`EmptyCell`, `NotDeallocated`) mean an internal cache has been
/// driven into an inconsistent state and should never surface in normal use.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("label vector is empty")]
    EmptyLabels,

    #[error("length mismatch: expected {expected} items, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("no draws supplied")]
    NoDraws,

    #[error("draw {row} has {found} items, expected {expected}")]
    RaggedDraws {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("loss weight {name} must be positive and finite, got {value}")]
    InvalidWeight { name: &'static str, value: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{loss} requires at least {min} items, found {found}")]
    TooFewItems {
        loss: &'static str,
        min: usize,
        found: usize,
    },

    #[error("enumeration of {n} items exceeds the cap of {cap}")]
    EnumerationCap { n: usize, cap: usize },

    #[error("unknown loss '{0}'")]
    UnknownLoss(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("cannot move out of empty cell ({row}, {col})")]
    EmptyCell { row: usize, col: usize },

    #[error("item {0} is still allocated")]
    NotDeallocated(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
