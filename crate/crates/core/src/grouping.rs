//! Validation-anchored quartile thresholds and G1–G4 assignment.
//!
//! Thresholds are the 25th/50th/75th percentiles of validation scores, using
//! linear interpolation between order statistics at position `(n - 1) * q`.
//! Test samples are assigned with closed upper bounds: a score equal to a
//! threshold falls in the lower group.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::tables::format_scores;
use crate::metadata::{sha256_hex, RunMetadata};
use crate::model::{GroupAssignment, GroupLabel, ScoreRecord};

/// Identifier of the interpolation rule, recorded with every threshold set.
pub const QUANTILE_METHOD: &str = "linear_interp_q7";
pub const MIN_VALIDATION_SCORES: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupThresholds {
    pub tau25: f64,
    pub tau50: f64,
    pub tau75: f64,
    pub n_val: usize,
    pub method: String,
    /// Content digest of the validation scores the thresholds were fitted on.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_digest: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<RunMetadata>,
}

impl GroupThresholds {
    pub fn validate(&self) -> Result<()> {
        let taus = [self.tau25, self.tau50, self.tau75];
        if let Some(&bad) = taus.iter().find(|t| !t.is_finite()) {
            return Err(Error::NonFiniteScore(bad));
        }
        if !(self.tau25 <= self.tau50 && self.tau50 <= self.tau75) {
            return Err(Error::InvalidThresholds(format!(
                "expected tau25 <= tau50 <= tau75, got {} / {} / {}",
                self.tau25, self.tau50, self.tau75
            )));
        }
        if self.n_val < MIN_VALIDATION_SCORES {
            return Err(Error::InvalidThresholds(format!("n_val = {} is below 4", self.n_val)));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let thr: GroupThresholds = serde_json::from_str(text)?;
        thr.validate()?;
        Ok(thr)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("thresholds serialize");
        s.push('\n');
        s
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| e.in_file(path))
    }
}

/// Linear interpolation at position `(n - 1) * q` of an ascending slice.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    assert!((0.0..=1.0).contains(&q), "quantile level outside [0, 1]");
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let (a, b) = (sorted[lo], sorted[hi]);
    // Clamping keeps the interpolant inside [a, b] despite rounding, which in
    // turn keeps successive quantiles ordered.
    (a + (h - lo as f64) * (b - a)).clamp(a, b)
}

/// Content digest of a score set: SHA-256 of its canonical table body.
///
/// Rows are sorted by sample id first, so the digest is independent of row
/// order as well as file name, comment preamble and number formatting.
pub fn scores_digest(scores: &[ScoreRecord]) -> String {
    let mut sorted = scores.to_vec();
    sorted.sort_by(|a, b| a.sample_id.cmp(&b.sample_id));
    sha256_hex(format_scores(&sorted, &[]).as_bytes())
}

pub fn fit_thresholds(val_scores: &[ScoreRecord]) -> Result<GroupThresholds> {
    if val_scores.len() < MIN_VALIDATION_SCORES {
        return Err(Error::TooFewSamples {
            required: MIN_VALIDATION_SCORES,
            found: val_scores.len(),
        });
    }
    let mut values: Vec<f64> = val_scores.iter().map(|s| s.score).collect();
    if let Some(&bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFiniteScore(bad));
    }
    values.sort_unstable_by(f64::total_cmp);
    Ok(GroupThresholds {
        tau25: quantile_sorted(&values, 0.25),
        tau50: quantile_sorted(&values, 0.50),
        tau75: quantile_sorted(&values, 0.75),
        n_val: values.len(),
        method: QUANTILE_METHOD.to_string(),
        source_digest: Some(scores_digest(val_scores)),
        metadata: None,
    })
}

pub fn assign_group(score: f64, thr: &GroupThresholds) -> Result<GroupLabel> {
    if !score.is_finite() {
        return Err(Error::NonFiniteScore(score));
    }
    Ok(if score <= thr.tau25 {
        GroupLabel::G1
    } else if score <= thr.tau50 {
        GroupLabel::G2
    } else if score <= thr.tau75 {
        GroupLabel::G3
    } else {
        GroupLabel::G4
    })
}

pub fn assign_batch(scores: &[ScoreRecord], thr: &GroupThresholds) -> Result<Vec<GroupAssignment>> {
    let mut seen = HashSet::with_capacity(scores.len());
    for s in scores {
        if !seen.insert(&s.sample_id) {
            return Err(Error::DuplicateSampleId(s.sample_id.to_string()));
        }
    }
    let out: Vec<Result<GroupAssignment>> = scores
        .par_iter()
        .map(|s| {
            assign_group(s.score, thr).map(|group| GroupAssignment {
                sample_id: s.sample_id.clone(),
                group,
            })
        })
        .collect();
    out.into_iter().collect()
}

/// Number of assignments per group, G1 first.
pub fn group_sizes(assignments: &[GroupAssignment]) -> [usize; 4] {
    let mut sizes = [0; 4];
    for a in assignments {
        sizes[a.group.index()] += 1;
    }
    sizes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SampleId;

    fn scores(values: &[f64]) -> Vec<ScoreRecord> {
        values
            .iter()
            .enumerate()
            .map(|(i, &v)| ScoreRecord {
                sample_id: SampleId::new(format!("s{i}")).unwrap(),
                score: v,
            })
            .collect()
    }

    fn thr(a: f64, b: f64, c: f64) -> GroupThresholds {
        GroupThresholds {
            tau25: a,
            tau50: b,
            tau75: c,
            n_val: 8,
            method: QUANTILE_METHOD.into(),
            source_digest: None,
            metadata: None,
        }
    }

    #[test]
    fn one_to_eight() {
        // positions 1.75 / 3.5 / 5.25 over [1..8]
        let t = fit_thresholds(&scores(&[1., 2., 3., 4., 5., 6., 7., 8.])).unwrap();
        assert_eq!((t.tau25, t.tau50, t.tau75), (2.75, 4.5, 6.25));
        assert_eq!(t.n_val, 8);
        assert_eq!(t.method, "linear_interp_q7");
    }

    #[test]
    fn constant_scores() {
        let t = fit_thresholds(&scores(&[3.5; 6])).unwrap();
        assert_eq!((t.tau25, t.tau50, t.tau75), (3.5, 3.5, 3.5));
    }

    #[test]
    fn order_does_not_matter() {
        let a = fit_thresholds(&scores(&[5., 1., 4., 2., 8., 3., 7., 6.])).unwrap();
        let b = fit_thresholds(&scores(&[1., 2., 3., 4., 5., 6., 7., 8.])).unwrap();
        assert_eq!((a.tau25, a.tau50, a.tau75), (b.tau25, b.tau50, b.tau75));
    }

    #[test]
    fn too_few() {
        assert!(matches!(
            fit_thresholds(&scores(&[1., 2., 3.])),
            Err(Error::TooFewSamples { required: 4, found: 3 })
        ));
    }

    #[test]
    fn boundaries_fall_in_lower_group() {
        let t = thr(1.0, 2.0, 3.0);
        assert_eq!(assign_group(1.0, &t).unwrap(), GroupLabel::G1);
        assert_eq!(assign_group(2.0, &t).unwrap(), GroupLabel::G2);
        assert_eq!(assign_group(3.0, &t).unwrap(), GroupLabel::G3);
        assert_eq!(assign_group(3.0f64.next_up(), &t).unwrap(), GroupLabel::G4);
        assert_eq!(assign_group(1.0f64.next_up(), &t).unwrap(), GroupLabel::G2);
        assert!(matches!(assign_group(f64::NAN, &t), Err(Error::NonFiniteScore(_))));
    }

    #[test]
    fn degenerate_thresholds_skip_middle_groups() {
        let t = thr(2.0, 2.0, 2.0);
        assert_eq!(assign_group(2.0, &t).unwrap(), GroupLabel::G1);
        assert_eq!(assign_group(3.0, &t).unwrap(), GroupLabel::G4);
        assert_eq!(assign_group(1.0, &t).unwrap(), GroupLabel::G1);
    }

    #[test]
    fn batch_partition() {
        assert!(assign_batch(&[], &thr(0., 1., 2.)).unwrap().is_empty());
        let s = scores(&[0.5, 1.5, 2.5, 3.5, 1.0]);
        let a = assign_batch(&s, &thr(1.0, 2.0, 3.0)).unwrap();
        let groups: Vec<_> = a.iter().map(|x| x.group).collect();
        use GroupLabel::*;
        assert_eq!(groups, [G1, G2, G3, G4, G1]);
        assert_eq!(group_sizes(&a), [2, 1, 1, 1]);
        let mut dup = s.clone();
        dup.push(s[0].clone());
        assert!(matches!(assign_batch(&dup, &thr(1., 2., 3.)), Err(Error::DuplicateSampleId(_))));
    }

    #[test]
    fn json_shape() {
        let t = fit_thresholds(&scores(&[1., 2., 3., 4., 5., 6., 7., 8.])).unwrap();
        let v: serde_json::Value = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(v["tau25"], 2.75);
        assert_eq!(v["n_val"], 8);
        assert_eq!(v["method"], "linear_interp_q7");
        let minimal = r#"{"tau25":1,"tau50":2,"tau75":3,"n_val":10,"method":"linear_interp_q7"}"#;
        assert_eq!(GroupThresholds::from_json(minimal).unwrap().tau50, 2.0);
        let unordered = r#"{"tau25":3,"tau50":2,"tau75":3,"n_val":10,"method":"m"}"#;
        assert!(GroupThresholds::from_json(unordered).is_err());
    }

    #[test]
    fn digest_ignores_formatting() {
        let a = scores(&[1.0, 2.5]);
        let text = "# comment\nsample_id,score\ns0,1.000\ns1,2.50\n";
        let b = crate::io::tables::parse_scores(text).unwrap().records;
        assert_eq!(scores_digest(&a), scores_digest(&b));
        assert_ne!(scores_digest(&a), scores_digest(&scores(&[1.0, 2.25])));
        let mut reversed = a.clone();
        reversed.reverse();
        assert_eq!(scores_digest(&a), scores_digest(&reversed));
    }
}
