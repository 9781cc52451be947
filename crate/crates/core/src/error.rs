// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("node {node} out of range for graph with {count} nodes")]
    NodeOutOfRange { node: usize, count: usize },

    #[error("graph has {0} nodes, more than the supported 64")]
    TooManyNodes(usize),

    #[error("self-loop on node {0}")]
    SelfLoop(usize),

    #[error("edge {0}->{1} would create a cycle")]
    Cycle(usize, usize),

    #[error("edge {0}->{1} is not in the graph")]
    EdgeAbsent(usize, usize),

    #[error("edge {0}->{1} is not isolated")]
    NotIsolated(usize, usize),

    #[error("node sets must be pairwise disjoint")]
    OverlappingSets,

    #[error("node sets A and B must be nonempty")]
    EmptySet,

    #[error("size mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),

    #[error("{what}: size {size} exceeds guard {limit}")]
    GuardExceeded { what: &'static str, size: usize, limit: usize },

    #[error("search undecided: {0}")]
    Undecided(String),

    #[error("inconsistent input: {0}")]
    InconsistentInput(String),

    #[error("subset {0} is not maximal valid")]
    NotMaximalValid(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv { path: path.into(), source }
    }
}
