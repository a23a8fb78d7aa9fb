use thiserror::Error;

use crate::graph::NodeId;

/// Errors produced by the analysis library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("graph is empty")]
    EmptyGraph,

    #[error("graph is not connected ({components} components)")]
    Disconnected { components: usize },

    #[error("node {node} out of range for graph with {node_count} nodes")]
    NodeOutOfRange { node: NodeId, node_count: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("cover is not a partition: node {node} belongs to {count} communities")]
    Overlapping { node: NodeId, count: usize },

    #[error("community is empty")]
    EmptyCommunity,

    #[error("no reducible pair")]
    NoReduciblePair,

    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
    },

    #[error("no attribute shift within 0.05 of target accuracy {target}: best shift {best_shift} reached {best_accuracy:.4}")]
    Calibration {
        target: f64,
        best_shift: usize,
        best_accuracy: f64,
    },

    #[error("unsatisfiable LFR configuration: {parameter}")]
    Lfr { parameter: String },

    #[error("non-finite objective in {0}")]
    NonFinite(&'static str),

    #[error("detector failed at prefix {prefix}: {source}")]
    Prefix {
        prefix: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("no qualifying stable structure")]
    NoQualifyingStructure,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
