//! Crate-wide error type and exit-code mapping.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty graph")]
    EmptyGraph,

    #[error("duplicate positions: vertices {0} and {1} coincide")]
    DuplicatePositions(usize, usize),

    #[error("invalid edge ({0}, {1}): {2}")]
    InvalidEdge(u32, u32, String),

    #[error("configuration length {actual} does not match vertex count {expected}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("MIS oracle budget exceeded")]
    MisBudgetExceeded,

    #[error("graph has {n} vertices, exceeding the simulator limit of {limit}")]
    SimulatorLimit { n: usize, limit: usize },

    #[error("integrator unstable, reduce dt_max")]
    IntegratorUnstable,

    #[error("quench duration undefined for edgeless graph")]
    EdgelessQuench,

    #[error("ratio diverges at zero Hamming distance")]
    ZeroHammingDistance,

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("invalid sample set: {0}")]
    InvalidSamples(String),

    #[error("fit failed: {0}")]
    FitFailed(String),

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

    #[error("{0}")]
    Format(String),
}

impl Error {
    /// Process exit code for the CLI contract: 2 for input/validation
    /// errors, 3 for resource-limit errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::SimulatorLimit { .. } | Error::MisBudgetExceeded => 3,
            _ => 2,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.into(),
            source,
        }
    }
}
