use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the gesture pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid kinematic chain: {0}")]
    Chain(String),

    #[error("unknown bone `{0}`")]
    UnknownBone(String),

    #[error("pose has {actual} DOFs, chain expects {expected}")]
    DofMismatch { expected: usize, actual: usize },

    #[error("empty mask")]
    EmptyMask,

    #[error("degenerate contour: {0}")]
    DegenerateContour(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("IK problem shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("zero-length direction vector in constraint on bone `{0}`")]
    ZeroDirection(String),

    #[error("non-finite cost at iteration {iteration}")]
    NonFiniteCost { iteration: usize },

    #[error("fps mismatch: {0} vs {1}")]
    FpsMismatch(u32, u32),

    #[error("chain id mismatch: clip `{clip}` vs chain `{chain}`")]
    ChainIdMismatch { clip: String, chain: String },

    #[error("mask for object `{id}` unreadable at {path}: {reason}")]
    Mask {
        id: String,
        path: PathBuf,
        reason: String,
    },

    #[error("{file}: line {line}: {message}")]
    Parse {
        file: String,
        line: usize,
        message: String,
    },

    #[error("invalid scene: {0}")]
    Scene(String),

    #[error("invalid transcript: {0}")]
    Transcript(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(file: impl std::fmt::Display, err: serde_json::Error) -> Self {
        Error::Parse {
            file: file.to_string(),
            line: err.line(),
            message: err.to_string(),
        }
    }

    /// Process exit code category used by the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 4,
            Error::Parse { .. } | Error::Config(_) | Error::Mask { .. } => 3,
            Error::Scene(_) | Error::Transcript(_) => 3,
            Error::FpsMismatch(..) | Error::ChainIdMismatch { .. } => 3,
            Error::Chain(_) | Error::UnknownBone(_) => 3,
            _ => 5,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
