use std::path::PathBuf;

use crate::graph::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("tile `{name}` is invalid: {}", join_violations(.violations))]
    InvalidTile { name: String, violations: Vec<Violation> },

    #[error("tiles `{left}` and `{right}` are incompatible: right wall has {right_wall} vertices, left wall has {left_wall}")]
    IncompatibleTiles { left: String, right: String, right_wall: usize, left_wall: usize },

    #[error("identifying walls would create a parallel edge between vertices {0} and {1}")]
    ParallelEdge(usize, usize),

    #[error("identifying walls would create a self-loop at vertex {0}")]
    SelfLoop(usize),

    #[error("sequence is not cyclically compatible: last right wall has {last_right} vertices, first left wall has {first_left}")]
    NotCyclicallyCompatible { last_right: usize, first_left: usize },

    #[error("a tiled graph needs at least 3 tiles, got {0}")]
    TooFewTiles(usize),

    #[error("invalid k = {k}: must satisfy 1 <= k <= {max}")]
    InvalidK { k: usize, max: usize },

    #[error("{0} is not a member of the family")]
    NotInFamily(String),

    #[error("invalid entry query: {0}")]
    InvalidQuery(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("graph has {vertices} vertices, above the oracle cap of {cap}")]
    GraphTooLarge { vertices: usize, cap: usize },

    #[error("not a Hamiltonian cycle: {0}")]
    NotAHamiltonianCycle(String),

    #[error("malformed {what}: {reason}")]
    Format { what: String, reason: String },

    #[error("unknown tile `{0}`")]
    UnknownTile(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

fn join_violations(violations: &[Violation]) -> String {
    violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

impl Error {
    pub(crate) fn format(what: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Format { what: what.into(), reason: reason.into() }
    }
}
