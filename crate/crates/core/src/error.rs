use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to load {path}: {reason}")]
    Load { path: PathBuf, reason: String },

    #[error("manifest {path}, row {row}: {reason}")]
    Manifest {
        path: PathBuf,
        row: usize,
        reason: String,
    },

    #[error("invalid raster: {0}")]
    InvalidRaster(String),

    #[error("size mismatch: reference is {ref_w}x{ref_h}, distorted is {dist_w}x{dist_h}")]
    SizeMismatch {
        ref_w: usize,
        ref_h: usize,
        dist_w: usize,
        dist_h: usize,
    },

    #[error("image too small for {what}: {width}x{height}, need at least {min}x{min}")]
    TooSmall {
        what: &'static str,
        width: usize,
        height: usize,
        min: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid camera configuration: {0}")]
    Camera(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("scorer {scorer} unavailable for sample '{sample}': {reason}")]
    ScorerUnavailable {
        scorer: u8,
        sample: String,
        reason: String,
    },

    #[error("scorer {scorer}, sample '{sample}': {source}")]
    Feature {
        scorer: u8,
        sample: String,
        #[source]
        source: Box<Error>,
    },

    #[error("fold plan infeasible: {0}")]
    FoldPlan(String),

    #[error("model profile mismatch: {0}")]
    ProfileMismatch(String),

    #[error("evaluation: {0}")]
    Evaluation(String),

    #[error("unknown feature '{name}', valid names: {valid}")]
    UnknownFeature { name: String, valid: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
