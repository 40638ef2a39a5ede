use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("decode failure: {0}")]
    Decode(String),

    #[error("encode failure: {0}")]
    Encode(String),

    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),

    #[error("zero-dimension {what}")]
    ZeroDimension { what: &'static str },

    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    DimensionMismatch {
        expected: (usize, usize, usize),
        actual: (usize, usize, usize),
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate point configuration: {0}")]
    DegenerateConfiguration(&'static str),

    #[error("homography normalization failure (|a33| = {0:e})")]
    NormalizationFailure(f64),

    #[error("invalid quad at cell ({0}, {1})")]
    InvalidQuad(usize, usize),

    #[error("mesh shape mismatch: {0}")]
    MeshShapeMismatch(String),

    #[error("non-finite flow at pixel ({x}, {y})")]
    NonFiniteFlow { x: usize, y: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
