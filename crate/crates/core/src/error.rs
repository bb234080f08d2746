use thiserror::Error;

use crate::fairness::Criterion;
use crate::mechanisms::MechanismId;
use crate::model::ValidationReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("unknown good label `{0}`")]
    UnknownGood(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(ValidationReport),

    #[error("allocation is not a complete partition of the goods")]
    IncompleteAllocation,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{what} needs {required} evaluations, above the cap of {cap}; use a smaller instance or space")]
    Capacity {
        what: &'static str,
        required: u128,
        cap: u128,
    },

    #[error("{mechanism} requires {expected} valuations but agent {} reports a {found} valuation", .agent + 1)]
    Restriction {
        mechanism: MechanismId,
        agent: usize,
        expected: &'static str,
        found: &'static str,
    },

    #[error("misreport space {space} does not match agent {}'s {found} valuation", .agent + 1)]
    SpaceMismatch {
        space: &'static str,
        agent: usize,
        found: &'static str,
    },

    #[error("no {0} allocation exists for the truthful profile")]
    EmptyFairSet(Criterion),
}

/// Broad class of an error, used to pick process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorClass {
    Input,
    Restriction,
    Capacity,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Restriction { .. } | Error::SpaceMismatch { .. } => ErrorClass::Restriction,
            Error::Capacity { .. } => ErrorClass::Capacity,
            _ => ErrorClass::Input,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
