//! Augmentation-sensitivity risk score: the sum over the four rotated views
//! of the Euclidean distance between the rotated-view embedding and the
//! original-view embedding.
//!
//! All accumulation is in `f64`, in fixed index order, so a sample's score
//! does not depend on how a batch is partitioned across threads. Embeddings
//! are used as given; no normalization is applied.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{EmbeddingRecord, SampleId, ScoreRecord, ViewTag};

/// Euclidean norm of `shifted - origin`.
pub fn shift_norm<T: Copy + Into<f64>>(origin: &[T], shifted: &[T]) -> Result<f64> {
    if origin.len() != shifted.len() {
        return Err(Error::LengthMismatch {
            left: origin.len(),
            right: shifted.len(),
        });
    }
    let mut sum_sq = 0.0f64;
    for (i, (&a, &b)) in origin.iter().zip(shifted).enumerate() {
        let (a, b): (f64, f64) = (a.into(), b.into());
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::NonFiniteComponent(i));
        }
        let d = b - a;
        sum_sq += d * d;
    }
    Ok(sum_sq.sqrt())
}

/// Per-rotation shifts of one sample and their sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftBreakdown {
    pub sample_id: SampleId,
    /// Indexed like [`ViewTag::ROTATIONS`].
    pub per_view: [f64; 4],
    pub total: f64,
}

impl ShiftBreakdown {
    pub fn shift(&self, view: ViewTag) -> Option<f64> {
        ViewTag::ROTATIONS
            .iter()
            .position(|&v| v == view)
            .map(|i| self.per_view[i])
    }
}

/// Sums rotated-view shifts in canonical order.
pub fn score_views<T: Copy + Into<f64>>(origin: &[T], rotated: [&[T]; 4]) -> Result<([f64; 4], f64)> {
    let mut per_view = [0.0; 4];
    let mut total = 0.0;
    for (slot, view) in per_view.iter_mut().zip(rotated) {
        *slot = shift_norm(origin, view)?;
        total += *slot;
    }
    Ok((per_view, total))
}

pub fn score_sample(rec: &EmbeddingRecord) -> Result<ShiftBreakdown> {
    let origin = rec.view(ViewTag::Original);
    let mut per_view = [0.0; 4];
    let mut total = 0.0;
    for (slot, tag) in per_view.iter_mut().zip(ViewTag::ROTATIONS) {
        *slot = shift_norm(origin, rec.view(tag)).map_err(|e| match e {
            Error::NonFiniteComponent(index) => Error::NonFiniteValue {
                sample: rec.sample_id().to_string(),
                view: tag,
                index,
            },
            other => other,
        })?;
        total += *slot;
    }
    Ok(ShiftBreakdown {
        sample_id: rec.sample_id().clone(),
        per_view,
        total,
    })
}

/// Scores every record on the current rayon pool; output order and values
/// match a sequential run exactly.
pub fn score_batch(recs: &[EmbeddingRecord]) -> Result<Vec<ScoreRecord>> {
    let mut seen = HashSet::with_capacity(recs.len());
    for r in recs {
        if !seen.insert(r.sample_id()) {
            return Err(Error::DuplicateSampleId(r.sample_id().to_string()));
        }
    }
    let results: Vec<Result<ScoreRecord>> = recs
        .par_iter()
        .map(|r| {
            score_sample(r).map(|b| ScoreRecord {
                sample_id: b.sample_id,
                score: b.total,
            })
        })
        .collect();
    results.into_iter().collect()
}
