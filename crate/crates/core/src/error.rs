use thiserror::Error;

use crate::digraph::{Edge, Vertex};

/// Argument and contract errors raised by graph-level operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("vertex {vertex} out of range for a digraph on {n} vertices")]
    VertexOutOfRange { vertex: Vertex, n: usize },
    #[error("loop at vertex {0} is not allowed")]
    Loop(Vertex),
    #[error("parallel edge {0} rejected by a simple digraph")]
    ParallelEdge(Edge),
    #[error("vertex sets overlap at vertex {0}")]
    OverlappingSets(Vertex),
    #[error("invalid vertex partition: {0}")]
    InvalidPartition(String),
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("invalid cycle: {0}")]
    InvalidCycle(String),
    #[error("digraph is not Eulerian: vertex {vertex} has excess {excess}")]
    NotEulerian { vertex: Vertex, excess: i64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Failure to read one of the line-oriented text formats.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(line: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            message: message.into(),
        }
    }
}
