//! Prediction confidence `max(p, 1 - p)` and its per-group means over all
//! samples, positives only and negatives only.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::{join_task, MetricsRow, TaskSamples};
use crate::metric::{Metric, UndefinedReason};
use crate::model::{GroupAssignment, GroupLabel, LabelRecord, PredictionRecord};

pub fn conf_overall(prob: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&prob) {
        return Err(Error::OutOfRange {
            name: "prob",
            value: prob,
            range: "[0, 1]",
        });
    }
    Ok(prob.max(1.0 - prob))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceRow {
    pub task: String,
    pub group: GroupLabel,
    pub n: usize,
    pub n_pos: usize,
    pub n_neg: usize,
    pub mean_overall: Metric,
    pub mean_pos: Metric,
    pub mean_neg: Metric,
}

pub fn confidence_rows(samples: &TaskSamples) -> Result<Vec<ConfidenceRow>> {
    let mut sums = [[0.0f64; 2]; 4];
    let mut counts = [[0usize; 2]; 4];
    for ((&p, &y), &g) in samples.probs.iter().zip(&samples.labels).zip(&samples.groups) {
        let c = conf_overall(p)?;
        sums[g.index()][y as usize] += c;
        counts[g.index()][y as usize] += 1;
    }
    Ok(GroupLabel::ALL
        .iter()
        .map(|&g| {
            let [neg_sum, pos_sum] = sums[g.index()];
            let [n_neg, n_pos] = counts[g.index()];
            let n = n_neg + n_pos;
            ConfidenceRow {
                task: samples.task.clone(),
                group: g,
                n,
                n_pos,
                n_neg,
                mean_overall: Metric::ratio(neg_sum + pos_sum, n as f64, UndefinedReason::EmptyGroup),
                mean_pos: Metric::ratio(pos_sum, n_pos as f64, UndefinedReason::NoPositives),
                mean_neg: Metric::ratio(neg_sum, n_neg as f64, UndefinedReason::NoNegatives),
            }
        })
        .collect())
}

pub fn confidence_table(
    assignments: &[GroupAssignment],
    preds: &[PredictionRecord],
    labels: &[LabelRecord],
    task: &str,
) -> Result<Vec<ConfidenceRow>> {
    confidence_rows(&join_task(assignments, preds, labels, task)?)
}

/// The group whose mean confidence is strictly the highest while its recall
/// is strictly the lowest, among groups where both are defined.
pub fn overconfident_unstable(conf: &[ConfidenceRow], metrics: &[MetricsRow]) -> Option<GroupLabel> {
    let pairs: Vec<(GroupLabel, f64, f64)> = conf
        .iter()
        .filter_map(|c| {
            let m = metrics.iter().find(|m| m.group == c.group)?;
            Some((c.group, c.mean_overall.value()?, m.recall.value()?))
        })
        .collect();
    pairs
        .iter()
        .find(|&&(g, conf, recall)| {
            pairs.len() >= 2
                && pairs
                    .iter()
                    .filter(|p| p.0 != g)
                    .all(|&(_, other_conf, other_recall)| conf > other_conf && recall < other_recall)
        })
        .map(|p| p.0)
}
