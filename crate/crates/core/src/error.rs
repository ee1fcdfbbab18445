use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("graph has no edges")]
    EmptyGraph,

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("filtration weight {0} outside [0, 1]")]
    WeightOutOfRange(f64),

    #[error("skeleton construction exceeded work cap of {cap} candidate simplices")]
    WorkCapExceeded { cap: usize },

    #[error("naive oracle supports at most {cap} nodes, graph has {nodes}")]
    OracleCapExceeded { cap: usize, nodes: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("missing label for graph `{0}`")]
    MissingLabel(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("{path}: {source}")]
    File {
        path: String,
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
