use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {}", .0.display())]
    MissingFile(PathBuf),

    #[error("missing mandatory column {0:?}")]
    MissingColumn(String),

    #[error("malformed CSV at row {row}: {detail}")]
    MalformedRow { row: u64, detail: String },

    #[error("dataset is empty after cleaning")]
    EmptyDataset,

    #[error("label {label} class too small to stratify: {count} records, need at least {needed}")]
    ClassTooSmall { label: u8, count: usize, needed: usize },

    #[error("dataset too small: {len} records, need at least {needed}")]
    TooFewRecords { len: usize, needed: usize },

    #[error("invalid ratios: {0}")]
    InvalidRatios(String),

    #[error("invalid fake profile: {0}")]
    InvalidProfile(String),

    #[error("label contamination: {side} record {lm_id:?} carries label {label}")]
    LabelContamination { side: &'static str, lm_id: String, label: u8 },

    #[error("both classes are required, {0} side is empty")]
    MissingClass(&'static str),

    #[error("unknown attribute {0:?}")]
    UnknownAttribute(String),

    #[error("the active feature set would be empty")]
    EmptyFeatureSet,

    #[error("attribute {0} is not active in the encoder")]
    AttributeNotActive(String),

    #[error("invalid SMOTE request: {0}")]
    Smote(String),

    #[error("invalid network shape: {0}")]
    InvalidShape(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("training diverged at epoch {epoch}: {detail}")]
    Diverged { epoch: usize, detail: String },

    #[error("length mismatch: {0} predictions vs {1} labels")]
    LengthMismatch(usize, usize),

    #[error("unsupported format version {found} (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
