use crate::hypergraph::{EdgeId, NodeId};
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("node {node} is out of range for a hypergraph with n = {n}")]
    NodeOutOfRange { node: NodeId, n: usize },

    #[error("node {0} is not part of this hypergraph")]
    UnknownNode(NodeId),

    #[error("node ids are limited to {limit} (got n = {n})")]
    TooManyNodes { n: usize, limit: usize },

    #[error("hyperedge {0} has an empty tail set")]
    EmptyTails(EdgeId),

    #[error("hyperedge {edge} lists its head {head} among its tails")]
    HeadInTails { edge: EdgeId, head: NodeId },

    #[error("duplicate hyperedge id {0}")]
    DuplicateEdge(EdgeId),

    #[error("unknown hyperedge id {0}")]
    UnknownEdge(EdgeId),

    #[error("node sets must be disjoint: {0}")]
    Overlap(String),

    #[error("invalid split: {0}")]
    InvalidSplit(String),

    #[error("malformed witness: {0}")]
    MalformedWitness(String),

    #[error("hypergraph is not undirected: {0}")]
    NotUndirected(String),

    #[error("{0}")]
    InvalidArgument(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("protocol: {0}")]
    Protocol(String),
}
