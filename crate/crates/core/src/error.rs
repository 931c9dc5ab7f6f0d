//! Error type shared by every module of the toolkit.

use std::path::PathBuf;

use crate::model::{GroupLabel, ViewTag};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid sample id {id:?}: {reason}")]
    InvalidSampleId { id: String, reason: &'static str },

    #[error("file does not start with the ASRS magic bytes and is not JSONL")]
    BadMagic,

    #[error("unsupported embedding file version {0}")]
    VersionUnsupported(u32),

    #[error("malformed embedding header: {0}")]
    MalformedHeader(String),

    #[error("file truncated while reading {context}")]
    TruncatedFile { context: String },

    #[error("{0} unexpected trailing bytes after the last record")]
    TrailingData(usize),

    #[error("non-finite value in sample {sample} view {view} at component {index}")]
    NonFiniteValue {
        sample: String,
        view: ViewTag,
        index: usize,
    },

    #[error("duplicate sample id {0}")]
    DuplicateSampleId(String),

    #[error("records have mixed embedding dimensions ({expected} and {found})")]
    MixedDimensions { expected: usize, found: usize },

    #[error("nothing to write: record set is empty")]
    EmptyInput,

    #[error("sample {sample}: {reason}")]
    InvalidRecord { sample: String, reason: String },

    #[error("line {line}: malformed JSON record: {message}")]
    BadJson { line: usize, message: String },

    #[error("missing column {0:?}")]
    MissingColumn(String),

    #[error("line {line}, column {column:?}: bad value {value:?} ({reason})")]
    BadValue {
        line: u64,
        column: String,
        value: String,
        reason: String,
    },

    #[error("line {line}: duplicate key {key}")]
    DuplicateKey { line: u64, key: String },

    #[error("vector length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("non-finite vector component at index {0}")]
    NonFiniteComponent(usize),

    #[error("need at least {required} validation scores, got {found}")]
    TooFewSamples { required: usize, found: usize },

    #[error("non-finite score {0}")]
    NonFiniteScore(f64),

    #[error("invalid thresholds: {0}")]
    InvalidThresholds(String),

    #[error("prediction for sample {sample} task {task} has no matching label")]
    MissingLabel { sample: String, task: String },

    #[error("label for sample {sample} task {task} has no matching prediction")]
    MissingPrediction { sample: String, task: String },

    #[error("sample {0} has predictions but no group assignment")]
    UnassignedSample(String),

    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("group contains a single class; cannot resample to a target prevalence")]
    DegenerateGroup,

    #[error("target prevalence {target} would keep fewer than one {class} sample")]
    UnreachableTarget { target: f64, class: &'static str },

    #[error("group {0} not present")]
    MissingGroup(GroupLabel),

    #[error("unknown task {task:?}; available tasks: {}", available.join(", "))]
    UnknownTask { task: String, available: Vec<String> },

    #[error(
        "the scores being grouped are the ones the thresholds were fitted on (sha256 {digest}); \
         fit thresholds on a validation split and assign a separate test split"
    )]
    Leakage { digest: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    File {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Attaches the offending file path, unless the error already names one.
    pub fn in_file(self, path: impl Into<PathBuf>) -> Self {
        match self {
            e @ (Error::Io { .. } | Error::File { .. }) => e,
            other => Error::File {
                path: path.into(),
                source: Box::new(other),
            },
        }
    }
}
