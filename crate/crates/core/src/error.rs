use thiserror::Error;

use crate::graph::VertexType;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("edge ({u}, {v}) joins two vertices of type {kind}")]
    SameTypeEdge { u: usize, v: usize, kind: VertexType },

    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),

    #[error("line {line}: unknown vertex id {id}")]
    UnknownVertex { line: usize, id: usize },

    #[error("expected {expected} entries, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("partition mixes vertex types within a group")]
    MixedTypePartition,

    #[error("vertex {vertex} cannot move to group {group}: group type does not match vertex type")]
    TypeMismatch { vertex: usize, group: usize },

    #[error("vertex {vertex} is already in group {group}")]
    AlreadyInGroup { vertex: usize, group: usize },

    #[error("group {0} has members but zero total degree")]
    ZeroDegreeGroup(usize),

    #[error("graph has no edges")]
    EmptyGraph,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("missing per-replicate pure-type flags")]
    MissingFlags,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
