use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("{path}: row {row}: expected {expected} fields, found {found}")]
    RaggedRow {
        path: String,
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("{path}: row {row}, column {column}: cannot parse {value:?} as a number")]
    Parse {
        path: String,
        row: usize,
        column: usize,
        value: String,
    },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("scale {eps} is below the tower resolution {resolution}")]
    Scale { eps: f64, resolution: f64 },

    #[error("cover widths are not uniform: {0}")]
    NonUniformCover(String),

    #[error("cluster {cluster} (cover set {index:?}) is not contained in a single cluster at the larger scale")]
    ContainmentViolation { cluster: usize, index: Vec<usize> },

    #[error("stage {stage}: node {node} has no same-index overlap with any node of the next stage")]
    UnmatchedNode { stage: usize, node: usize },

    #[error("filtration is not monotone: simplex {simplex:?} born at {birth} before its face {face:?} born at {face_birth}")]
    NonMonotone {
        simplex: Vec<usize>,
        birth: f64,
        face: Vec<usize>,
        face_birth: f64,
    },

    #[error("stage {stage}: {source}")]
    Stage {
        stage: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn at_stage(self, stage: usize) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
