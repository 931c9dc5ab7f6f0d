//! Label-free reliability auditing from embedding instability under small
//! rotations.
//!
//! The pipeline scores each image by how far its embedding moves under four
//! rotations, splits a test cohort into stability quartiles using thresholds
//! fitted on a separate validation split, and reports per-group precision,
//! recall, AUROC, confidence and demographic composition.

pub mod confidence;
pub mod demographics;
pub mod error;
pub mod evaluation;
pub mod grouping;
pub mod io;
pub mod metadata;
pub mod metric;
pub mod model;
pub mod pipeline;
pub mod report;
pub mod scoring;
pub mod synth;

pub use error::{Error, Result};
pub use metric::{Metric, UndefinedReason};
pub use model::{
    CohortRecord, EmbeddingRecord, GroupAssignment, GroupLabel, LabelRecord, PredictionRecord, Race,
    SampleId, ScoreRecord, Sex, ViewTag,
};
