use std::path::PathBuf;

use crate::depth::DepthKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("degenerate depth: every value equals {value}, normalization is undefined")]
    DegenerateDepth { value: f64 },

    #[error("non-finite input value at index {index}")]
    NonFiniteInput { index: usize },

    #[error("wrong depth kind: expected {expected}, found {found}")]
    WrongKind {
        expected: &'static str,
        found: DepthKind,
    },

    #[error("disparity scale must be non-zero")]
    ZeroScale,

    #[error("invalid depth map: {0}")]
    InvalidDepthMap(String),

    #[error("invalid intrinsics: {0}")]
    InvalidIntrinsics(String),

    #[error("field of view {0} deg is outside (0, 180)")]
    InvalidFov(f64),

    #[error("{} point(s) with non-positive depth, first at grid index {}", .indices.len(), .indices[0])]
    NonPositiveDepth { indices: Vec<usize> },

    #[error("input too small: {0}")]
    TooSmall(String),

    #[error("synthetic depth must be positive, got {0}")]
    InvalidDepth(f64),

    #[error("invalid depth range: need 0 < near < far, got near={near}, far={far}")]
    InvalidRange { near: f64, far: f64 },

    #[error("expected {expected} channels, found {found}")]
    BadChannels { expected: usize, found: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("fusion parameters are for {found}, not {expected}")]
    WrongStrategy {
        expected: &'static str,
        found: &'static str,
    },

    #[error("{channels} channels cannot be split across {heads} heads")]
    BadHeadCount { channels: usize, heads: usize },

    #[error("dataset contains no trajectories")]
    EmptyDataset,

    #[error("trajectory {0} has no steps")]
    EmptyTrajectory(usize),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid action: {0}")]
    InvalidAction(String),

    #[error("malformed {format} data: {msg}")]
    Format { format: &'static str, msg: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn format(format: &'static str, msg: impl Into<String>) -> Self {
        Error::Format {
            format,
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
