use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the depth-cue toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to decode {path}: {reason}")]
    Decode { path: PathBuf, reason: String },

    #[error("dimension mismatch: expected {expected_w}x{expected_h}, got {actual_w}x{actual_h}")]
    DimensionMismatch {
        expected_w: usize,
        expected_h: usize,
        actual_w: usize,
        actual_h: usize,
    },

    #[error("wrong channel count: expected {expected}, got {actual}")]
    WrongChannelCount { expected: usize, actual: usize },

    #[error("invalid raster: {0}")]
    InvalidRaster(String),

    #[error("dataset is empty or too small: {0}")]
    EmptyDataset(String),

    #[error("duplicate entry id {0:?}")]
    DuplicateId(String),

    #[error("patch size {patch} does not fit a {width}x{height} image")]
    PatchTooLarge {
        patch: usize,
        width: usize,
        height: usize,
    },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("non-positive depth at pixel {index}: {value}")]
    NonPositiveDepth { index: usize, value: f64 },

    #[error("valid mask selects no pixels")]
    EmptyMask,

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("baseline model used before fitting")]
    NotFitted,

    #[error("cannot split {height} rows into {rows} bands")]
    TooManyRows { rows: usize, height: usize },

    #[error("missing sidecar: {0}")]
    MissingSidecar(PathBuf),

    #[error("sidecar version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("id mismatch: {0}")]
    IdMismatch(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn dims(expected: (usize, usize), actual: (usize, usize)) -> Self {
        Error::DimensionMismatch {
            expected_w: expected.0,
            expected_h: expected.1,
            actual_w: actual.0,
            actual_h: actual.1,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
