use alloc::string::String;

use crate::genealogy::{NodeId, OpKind};

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("unknown node {0}")]
    UnknownNode(NodeId),

    #[error("{op} expects {expected} parent(s), got {got}")]
    Arity {
        op: OpKind,
        expected: usize,
        got: usize,
    },

    #[error("cannot average over an empty sample")]
    EmptySample,

    #[error("cannot select from an empty pool")]
    EmptyPool,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
