use thiserror::Error;

use crate::algebra::{ModeId, RecordId, Symbol};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("mode {0} is not live")]
    DeadMode(ModeId),

    #[error("mode {0} used twice in a two-mode element")]
    SameMode(ModeId),

    #[error("a signal mode already exists in this state")]
    DuplicateSignal,

    #[error("record {0} does not belong to this state")]
    ForeignRecord(RecordId),

    #[error("targets not eliminable: {0}")]
    TargetsNotEliminable(String),

    #[error("form still references measurement record symbol {0}")]
    LeftoverRecord(Symbol),

    #[error("symbol {0} has no registered variance")]
    MissingVariance(Symbol),

    #[error("optical CZ construction does not reproduce the closed-form gate: {0}")]
    ConstructionMismatch(String),

    #[error("no root of the error curve in the bracket: {0}")]
    NoRoot(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value,
            reason,
        }
    }
}
