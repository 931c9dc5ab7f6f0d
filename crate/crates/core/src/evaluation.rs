//! Per-group classification metrics: confusion counts at a probability
//! threshold, precision, recall, rank-based AUROC, and recall/AUROC after
//! resampling each group to the anchor group's prevalence.

use std::collections::{HashMap, HashSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::metric::{Metric, UndefinedReason};
use crate::model::{GroupAssignment, GroupLabel, LabelRecord, PredictionRecord, SampleId};

pub const DEFAULT_THRESHOLD: f64 = 0.5;
pub const DEFAULT_REPS: usize = 100;
pub const DEFAULT_ANCHOR: GroupLabel = GroupLabel::G4;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionCounts {
    /// A probability at or above `threshold` is a positive call.
    pub fn tally(probs: &[f64], labels: &[bool], threshold: f64) -> Self {
        let mut c = ConfusionCounts::default();
        for (&p, &y) in probs.iter().zip(labels) {
            match (p >= threshold, y) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, false) => c.tn += 1,
                (false, true) => c.fn_ += 1,
            }
        }
        c
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn precision(&self) -> Metric {
        Metric::ratio(self.tp as f64, (self.tp + self.fp) as f64, UndefinedReason::NoPositiveCalls)
    }

    pub fn recall(&self) -> Metric {
        Metric::ratio(self.tp as f64, (self.tp + self.fn_) as f64, UndefinedReason::NoPositives)
    }
}

fn check_threshold(threshold: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::OutOfRange {
            name: "threshold",
            value: threshold,
            range: "[0, 1]",
        });
    }
    Ok(())
}

/// Matches predictions to labels on `(sample_id, task)`, in prediction order.
pub fn pair_up(preds: &[PredictionRecord], labels: &[LabelRecord]) -> Result<(Vec<f64>, Vec<bool>)> {
    let by_key: HashMap<(&SampleId, &str), bool> = labels
        .iter()
        .map(|l| ((&l.sample_id, l.task.as_str()), l.positive))
        .collect();
    let mut probs = Vec::with_capacity(preds.len());
    let mut ys = Vec::with_capacity(preds.len());
    let mut used = HashSet::with_capacity(preds.len());
    for p in preds {
        let key = (&p.sample_id, p.task.as_str());
        let y = *by_key.get(&key).ok_or_else(|| Error::MissingLabel {
            sample: p.sample_id.to_string(),
            task: p.task.clone(),
        })?;
        used.insert(key);
        probs.push(p.prob);
        ys.push(y);
    }
    if let Some(l) = labels
        .iter()
        .find(|l| !used.contains(&(&l.sample_id, l.task.as_str())))
    {
        return Err(Error::MissingPrediction {
            sample: l.sample_id.to_string(),
            task: l.task.clone(),
        });
    }
    Ok((probs, ys))
}

pub fn confusion(preds: &[PredictionRecord], labels: &[LabelRecord], threshold: f64) -> Result<ConfusionCounts> {
    check_threshold(threshold)?;
    let (probs, ys) = pair_up(preds, labels)?;
    Ok(ConfusionCounts::tally(&probs, &ys, threshold))
}

pub fn precision_recall(c: &ConfusionCounts) -> (Metric, Metric) {
    (c.precision(), c.recall())
}

/// Mann–Whitney statistic in exact integer form.
///
/// `twice_u` counts every (positive, negative) pair with the positive ranked
/// higher as 2 and every tie as 1, so AUROC = `twice_u / (2 * n_pos * n_neg)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AurocStat {
    pub twice_u: u128,
    pub n_pos: u64,
    pub n_neg: u64,
}

impl AurocStat {
    pub fn pairs(&self) -> u128 {
        self.n_pos as u128 * self.n_neg as u128
    }

    pub fn metric(&self) -> Metric {
        if self.n_pos == 0 {
            Metric::undefined(UndefinedReason::NoPositives)
        } else if self.n_neg == 0 {
            Metric::undefined(UndefinedReason::NoNegatives)
        } else {
            Metric::Value(self.twice_u as f64 / (2 * self.pairs()) as f64)
        }
    }
}

/// Rank statistic over `(prob, label)` pairs already sorted by ascending prob.
///
/// Ties share the average of their ranks; with 1-based ranks `i+1..=j` the
/// doubled average rank is the integer `i + 1 + j`.
fn rank_stat_sorted(sorted: impl Iterator<Item = (f64, bool)>) -> AurocStat {
    let mut twice_rank_sum: u128 = 0;
    let mut n_pos: u64 = 0;
    let mut n: u64 = 0;
    let mut block_start: u64 = 0;
    let mut block_pos: u64 = 0;
    let mut block_value = f64::NAN;
    for (p, y) in sorted {
        if n > 0 && p != block_value {
            twice_rank_sum += block_pos as u128 * (block_start + 1 + n) as u128;
            block_start = n;
            block_pos = 0;
        }
        block_value = p;
        if y {
            block_pos += 1;
            n_pos += 1;
        }
        n += 1;
    }
    twice_rank_sum += block_pos as u128 * (block_start + 1 + n) as u128;
    let n_neg = n - n_pos;
    let twice_u = twice_rank_sum - n_pos as u128 * (n_pos as u128 + 1);
    AurocStat { twice_u, n_pos, n_neg }
}

fn sort_order(probs: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..probs.len()).collect();
    order.sort_by(|&a, &b| probs[a].total_cmp(&probs[b]));
    order
}

/// Rank-based AUROC statistic in O(n log n).
pub fn auroc_stat(probs: &[f64], labels: &[bool]) -> AurocStat {
    assert_eq!(probs.len(), labels.len(), "probs and labels differ in length");
    let order = sort_order(probs);
    rank_stat_sorted(order.iter().map(|&i| (probs[i], labels[i])))
}

pub fn auroc(preds: &[PredictionRecord], labels: &[LabelRecord]) -> Result<Metric> {
    let (probs, ys) = pair_up(preds, labels)?;
    Ok(auroc_stat(&probs, &ys).metric())
}

fn floor_with_tolerance(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        r
    } else {
        x.floor()
    }
}

/// Picks a subset whose prevalence matches `target`.
///
/// When the group is richer in positives than the target, every negative is
/// kept and `floor(target * n_neg / (1 - target))` positives are drawn
/// uniformly without replacement; otherwise every positive is kept and
/// negatives are drawn symmetrically. Returns ascending indices.
pub fn resample_to_prevalence(labels: &[bool], target: f64, seed: u64) -> Result<Vec<usize>> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::OutOfRange {
            name: "target prevalence",
            value: target,
            range: "(0, 1)",
        });
    }
    let (pos, neg): (Vec<usize>, Vec<usize>) = (0..labels.len()).partition(|&i| labels[i]);
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::DegenerateGroup);
    }
    let (n_pos, n_neg) = (pos.len() as f64, neg.len() as f64);
    let current = n_pos / (n_pos + n_neg);

    let (keep_all, pool, want, class) = if current > target {
        let want = floor_with_tolerance(target * n_neg / (1.0 - target));
        (neg, pos, want, "positive")
    } else {
        let want = floor_with_tolerance(n_pos * (1.0 - target) / target);
        (pos, neg, want, "negative")
    };
    if want < 1.0 {
        return Err(Error::UnreachableTarget { target, class });
    }
    let want = want as usize;
    if want >= pool.len() {
        return Ok((0..labels.len()).collect());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut subset: Vec<usize> = rand::seq::index::sample(&mut rng, pool.len(), want)
        .into_iter()
        .map(|k| pool[k])
        .chain(keep_all)
        .collect();
    subset.sort_unstable();
    Ok(subset)
}

/// Seed for one resampling replicate: the first 8 bytes (little-endian) of
/// SHA-256 over `"asrs-resample" || seed || group index || rep`.
///
/// Each replicate's seed depends only on its own coordinates, so adding
/// replicates never changes earlier ones.
pub fn rep_seed(seed: u64, group: GroupLabel, rep: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(b"asrs-resample");
    h.update(seed.to_le_bytes());
    h.update([group.index() as u8]);
    h.update(rep.to_le_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub threshold: f64,
    pub anchor: GroupLabel,
    pub reps: usize,
    pub seed: u64,
}

impl EvalConfig {
    pub fn new(seed: u64) -> Self {
        EvalConfig {
            threshold: DEFAULT_THRESHOLD,
            anchor: DEFAULT_ANCHOR,
            reps: DEFAULT_REPS,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResampledMetrics {
    pub target_prevalence: Metric,
    pub reps: usize,
    pub recall: Metric,
    pub recall_sd: Metric,
    pub auroc: Metric,
    pub auroc_sd: Metric,
}

impl ResampledMetrics {
    fn undefined(target_prevalence: Metric, reps: usize, reason: UndefinedReason) -> Self {
        let u = Metric::undefined(reason);
        ResampledMetrics {
            target_prevalence,
            reps,
            recall: u,
            recall_sd: u,
            auroc: u,
            auroc_sd: u,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub task: String,
    pub group: GroupLabel,
    pub n: usize,
    pub n_pos: usize,
    pub prevalence: Metric,
    pub confusion: ConfusionCounts,
    pub precision: Metric,
    pub recall: Metric,
    pub auroc: Metric,
    /// Absent for the anchor group.
    pub resampled: Option<ResampledMetrics>,
}

/// One task's predictions joined with labels and groups, in prediction order.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskSamples {
    pub task: String,
    pub ids: Vec<SampleId>,
    pub probs: Vec<f64>,
    pub labels: Vec<bool>,
    pub groups: Vec<GroupLabel>,
}

impl TaskSamples {
    pub fn group_indices(&self, group: GroupLabel) -> Vec<usize> {
        (0..self.ids.len()).filter(|&i| self.groups[i] == group).collect()
    }
}

/// Task names in order of first appearance in the predictions.
pub fn task_names(preds: &[PredictionRecord]) -> Vec<String> {
    let mut seen = HashSet::new();
    preds
        .iter()
        .filter(|p| seen.insert(p.task.as_str()))
        .map(|p| p.task.clone())
        .collect()
}

pub fn join_task(
    assignments: &[GroupAssignment],
    preds: &[PredictionRecord],
    labels: &[LabelRecord],
    task: &str,
) -> Result<TaskSamples> {
    let task_preds: Vec<PredictionRecord> = preds.iter().filter(|p| p.task == task).cloned().collect();
    if task_preds.is_empty() {
        return Err(Error::UnknownTask {
            task: task.to_string(),
            available: task_names(preds),
        });
    }
    let task_labels: Vec<LabelRecord> = labels.iter().filter(|l| l.task == task).cloned().collect();
    let (probs, ys) = pair_up(&task_preds, &task_labels)?;
    let by_id: HashMap<&SampleId, GroupLabel> =
        assignments.iter().map(|a| (&a.sample_id, a.group)).collect();
    let groups = task_preds
        .iter()
        .map(|p| {
            by_id
                .get(&p.sample_id)
                .copied()
                .ok_or_else(|| Error::UnassignedSample(p.sample_id.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TaskSamples {
        task: task.to_string(),
        ids: task_preds.into_iter().map(|p| p.sample_id).collect(),
        probs,
        labels: ys,
        groups,
    })
}

fn mean_and_sd(values: &[f64]) -> (Metric, Metric) {
    if values.is_empty() {
        let u = Metric::undefined(UndefinedReason::DegenerateGroup);
        return (u, u);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = if values.len() < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    (Metric::Value(mean), Metric::Value(sd))
}

/// Group members sorted by probability, for repeated subset statistics.
struct GroupView {
    probs: Vec<f64>,
    labels: Vec<bool>,
}

impl GroupView {
    fn subset_metrics(&self, subset: &[usize], threshold: f64) -> (Metric, Metric) {
        let mut keep = vec![false; self.probs.len()];
        for &i in subset {
            keep[i] = true;
        }
        let mut c = ConfusionCounts::default();
        for i in subset.iter().copied() {
            match (self.probs[i] >= threshold, self.labels[i]) {
                (true, true) => c.tp += 1,
                (false, true) => c.fn_ += 1,
                (true, false) => c.fp += 1,
                (false, false) => c.tn += 1,
            }
        }
        let stat = rank_stat_sorted(
            (0..self.probs.len())
                .filter(|&i| keep[i])
                .map(|i| (self.probs[i], self.labels[i])),
        );
        (c.recall(), stat.metric())
    }
}

fn resampled_metrics(
    view: &GroupView,
    group: GroupLabel,
    target: Metric,
    cfg: &EvalConfig,
) -> ResampledMetrics {
    let target_value = match target {
        Metric::Value(t) if t > 0.0 && t < 1.0 => t,
        _ => return ResampledMetrics::undefined(target, cfg.reps, UndefinedReason::AnchorUndefined),
    };
    let reps: Vec<Result<(Metric, Metric)>> = (0..cfg.reps as u64)
        .into_par_iter()
        .map(|rep| {
            let subset = resample_to_prevalence(&view.labels, target_value, rep_seed(cfg.seed, group, rep))?;
            Ok(view.subset_metrics(&subset, cfg.threshold))
        })
        .collect();
    let mut recalls = Vec::with_capacity(cfg.reps);
    let mut aurocs = Vec::with_capacity(cfg.reps);
    for r in reps {
        match r {
            Ok((rec, auc)) => {
                recalls.extend(rec.value());
                aurocs.extend(auc.value());
            }
            Err(Error::DegenerateGroup) => {
                return ResampledMetrics::undefined(target, cfg.reps, UndefinedReason::DegenerateGroup)
            }
            Err(_) => {
                return ResampledMetrics::undefined(target, cfg.reps, UndefinedReason::UnreachableTarget)
            }
        }
    }
    let (recall, recall_sd) = mean_and_sd(&recalls);
    let (auroc, auroc_sd) = mean_and_sd(&aurocs);
    ResampledMetrics {
        target_prevalence: target,
        reps: cfg.reps,
        recall,
        recall_sd,
        auroc,
        auroc_sd,
    }
}

/// Metrics for one task, one row per group in G1..G4 order.
pub fn evaluate_samples(samples: &TaskSamples, cfg: &EvalConfig) -> Result<Vec<MetricsRow>> {
    check_threshold(cfg.threshold)?;
    if cfg.reps == 0 {
        return Err(Error::InvalidConfig("reps must be at least 1".into()));
    }
    let views: Vec<GroupView> = GroupLabel::ALL
        .iter()
        .map(|&g| {
            let mut idx = samples.group_indices(g);
            idx.sort_by(|&a, &b| samples.probs[a].total_cmp(&samples.probs[b]));
            GroupView {
                probs: idx.iter().map(|&i| samples.probs[i]).collect(),
                labels: idx.iter().map(|&i| samples.labels[i]).collect(),
            }
        })
        .collect();
    let prevalence = |v: &GroupView| {
        let pos = v.labels.iter().filter(|&&y| y).count();
        Metric::ratio(pos as f64, v.labels.len() as f64, UndefinedReason::EmptyGroup)
    };
    let anchor_prevalence = prevalence(&views[cfg.anchor.index()]);

    Ok(GroupLabel::ALL
        .iter()
        .zip(&views)
        .map(|(&group, view)| {
            let confusion = ConfusionCounts::tally(&view.probs, &view.labels, cfg.threshold);
            let stat = rank_stat_sorted(view.probs.iter().copied().zip(view.labels.iter().copied()));
            let resampled = (group != cfg.anchor).then(|| resampled_metrics(view, group, anchor_prevalence, cfg));
            MetricsRow {
                task: samples.task.clone(),
                group,
                n: view.labels.len(),
                n_pos: (confusion.tp + confusion.fn_) as usize,
                prevalence: prevalence(view),
                confusion,
                precision: confusion.precision(),
                recall: confusion.recall(),
                auroc: stat.metric(),
                resampled,
            }
        })
        .collect())
}

pub fn evaluate_stratified(
    assignments: &[GroupAssignment],
    preds: &[PredictionRecord],
    labels: &[LabelRecord],
    task: &str,
    cfg: &EvalConfig,
) -> Result<Vec<MetricsRow>> {
    let samples = join_task(assignments, preds, labels, task)?;
    evaluate_samples(&samples, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sid(s: &str) -> SampleId {
        SampleId::new(s).unwrap()
    }

    fn records(probs: &[f64], ys: &[bool]) -> (Vec<PredictionRecord>, Vec<LabelRecord>) {
        let preds = probs
            .iter()
            .enumerate()
            .map(|(i, &p)| PredictionRecord {
                sample_id: sid(&format!("s{i}")),
                task: "t".into(),
                prob: p,
            })
            .collect();
        let labels = ys
            .iter()
            .enumerate()
            .map(|(i, &y)| LabelRecord {
                sample_id: sid(&format!("s{i}")),
                task: "t".into(),
                positive: y,
            })
            .collect();
        (preds, labels)
    }

    #[test]
    fn confusion_example() {
        let (p, l) = records(&[0.9, 0.6, 0.4, 0.2], &[true, true, true, false]);
        let c = confusion(&p, &l, 0.5).unwrap();
        assert_eq!((c.tp, c.fn_, c.tn, c.fp), (2, 1, 1, 0));
        assert_eq!(c.total(), 4);
        let (prec, rec) = precision_recall(&c);
        assert_eq!(prec, Metric::Value(1.0));
        assert_eq!(rec, Metric::Value(2.0 / 3.0));
    }

    #[test]
    fn all_positive_and_boundary() {
        let (p, l) = records(&[1.0, 1.0, 1.0], &[true, true, true]);
        let c = confusion(&p, &l, 0.5).unwrap();
        assert_eq!((c.tp, c.fp, c.tn, c.fn_), (3, 0, 0, 0));
        let (p, l) = records(&[0.5], &[false]);
        assert_eq!(confusion(&p, &l, 0.5).unwrap().fp, 1);
        assert!(matches!(confusion(&p, &l, 1.5), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn precision_recall_guards() {
        let c = ConfusionCounts { tp: 0, fp: 0, tn: 5, fn_: 2 };
        assert_eq!(c.precision().reason(), Some(UndefinedReason::NoPositiveCalls));
        assert_eq!(c.precision().reason().unwrap().to_string(), "no positive calls");
        let c = ConfusionCounts { tp: 3, fp: 1, tn: 0, fn_: 3 };
        assert_eq!(c.recall(), Metric::Value(0.5));
    }

    #[test]
    fn matching_errors() {
        let (p, mut l) = records(&[0.1, 0.2], &[true, false]);
        let extra = LabelRecord { sample_id: sid("zz"), task: "t".into(), positive: true };
        l.push(extra);
        assert!(matches!(confusion(&p, &l, 0.5), Err(Error::MissingPrediction { sample, .. }) if sample == "zz"));
        let (p, l) = records(&[0.1, 0.2], &[true]);
        assert!(matches!(confusion(&p, &l, 0.5), Err(Error::MissingLabel { sample, .. }) if sample == "s1"));
    }

    #[test]
    fn auroc_examples() {
        let (p, l) = records(&[0.8, 0.3], &[true, false]);
        assert_eq!(auroc(&p, &l).unwrap(), Metric::Value(1.0));
        let (p, l) = records(&[0.5, 0.5], &[true, false]);
        assert_eq!(auroc(&p, &l).unwrap(), Metric::Value(0.5));
        // pairs (0.9,0.8)=1 (0.9,0.6)=1 (0.7,0.8)=0 (0.7,0.6)=1
        let (p, l) = records(&[0.9, 0.8, 0.7, 0.6], &[true, false, true, false]);
        assert_eq!(auroc(&p, &l).unwrap(), Metric::Value(0.75));
        let (p, l) = records(&[0.9, 0.8], &[true, true]);
        assert_eq!(auroc(&p, &l).unwrap().reason(), Some(UndefinedReason::NoNegatives));
    }

    #[test]
    fn auroc_stat_is_exact() {
        let s = auroc_stat(&[0.2, 0.2, 0.2, 0.7], &[true, false, false, true]);
        // positive 0.2 ties two negatives (1 + 1), positive 0.7 beats both (2 + 2)
        assert_eq!(s, AurocStat { twice_u: 6, n_pos: 2, n_neg: 2 });
    }

    #[test]
    fn resample_arithmetic() {
        // 30 positives, 70 negatives, target 0.2 -> keep 70 negatives and floor(17.5) = 17 positives
        let labels: Vec<bool> = (0..100).map(|i| i < 30).collect();
        let subset = resample_to_prevalence(&labels, 0.2, 5).unwrap();
        let pos = subset.iter().filter(|&&i| labels[i]).count();
        assert_eq!((pos, subset.len() - pos), (17, 70));
        assert!(subset.windows(2).all(|w| w[0] < w[1]));
        let achieved = 17.0 / 87.0;
        assert!((achieved - 0.2f64).abs() <= 1.0 / 87.0);
    }

    #[test]
    fn resample_noop_when_already_matched() {
        let labels: Vec<bool> = (0..100).map(|i| i < 30).collect();
        assert_eq!(resample_to_prevalence(&labels, 0.3, 1).unwrap(), (0..100).collect::<Vec<_>>());
    }

    #[test]
    fn resample_subsamples_negatives_when_below_target() {
        let labels: Vec<bool> = (0..100).map(|i| i < 10).collect();
        let subset = resample_to_prevalence(&labels, 0.5, 9).unwrap();
        let pos = subset.iter().filter(|&&i| labels[i]).count();
        assert_eq!((pos, subset.len() - pos), (10, 10));
    }

    #[test]
    fn resample_errors() {
        assert!(matches!(resample_to_prevalence(&[true, true], 0.5, 0), Err(Error::DegenerateGroup)));
        let labels = [true, false, false, false];
        assert!(matches!(
            resample_to_prevalence(&labels, 0.01, 0),
            Err(Error::UnreachableTarget { class: "positive", .. })
        ));
        assert!(matches!(resample_to_prevalence(&labels, 1.0, 0), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn resample_is_seeded() {
        let labels: Vec<bool> = (0..200).map(|i| i % 3 == 0).collect();
        let a = resample_to_prevalence(&labels, 0.1, 42).unwrap();
        assert_eq!(a, resample_to_prevalence(&labels, 0.1, 42).unwrap());
        assert_ne!(a, resample_to_prevalence(&labels, 0.1, 43).unwrap());
    }

    #[test]
    fn rep_seeds_are_stable_and_distinct() {
        assert_eq!(rep_seed(1, GroupLabel::G1, 0), rep_seed(1, GroupLabel::G1, 0));
        let seeds: HashSet<u64> = GroupLabel::ALL
            .iter()
            .flat_map(|&g| (0..50).map(move |r| rep_seed(7, g, r)))
            .collect();
        assert_eq!(seeds.len(), 200);
    }

    fn assign(ids: &[&str], groups: &[GroupLabel]) -> Vec<GroupAssignment> {
        ids.iter()
            .zip(groups)
            .map(|(i, &g)| GroupAssignment { sample_id: sid(i), group: g })
            .collect()
    }

    #[test]
    fn stratified_rows_and_undefined_groups() {
        use GroupLabel::*;
        let (p, l) = records(&[0.9, 0.2, 0.7, 0.4, 0.6, 0.1], &[true, false, true, false, false, false]);
        let a = assign(&["s0", "s1", "s2", "s3", "s4", "s5"], &[G1, G1, G2, G2, G4, G4]);
        let rows = evaluate_stratified(&a, &p, &l, "t", &EvalConfig { reps: 5, ..EvalConfig::new(3) }).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows.iter().map(|r| r.group).collect::<Vec<_>>(), GroupLabel::ALL);
        assert_eq!(rows[0].recall, Metric::Value(1.0));
        assert_eq!(rows[0].auroc, Metric::Value(1.0));
        // G3 is empty: every metric is explicitly undefined
        assert_eq!(rows[2].n, 0);
        assert_eq!(rows[2].prevalence.reason(), Some(UndefinedReason::EmptyGroup));
        assert!(!rows[2].recall.is_defined());
        // G4 has no positives, so resampled columns of other groups are undefined
        assert!(rows[3].resampled.is_none());
        let r0 = rows[0].resampled.as_ref().unwrap();
        assert_eq!(r0.recall.reason(), Some(UndefinedReason::AnchorUndefined));
    }

    #[test]
    fn unknown_task_lists_available() {
        let (p, l) = records(&[0.9], &[true]);
        let a = assign(&["s0"], &[GroupLabel::G1]);
        match evaluate_stratified(&a, &p, &l, "nope", &EvalConfig::new(1)) {
            Err(Error::UnknownTask { available, .. }) => assert_eq!(available, vec!["t".to_string()]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unassigned_sample_is_an_error() {
        let (p, l) = records(&[0.9, 0.1], &[true, false]);
        let a = assign(&["s0"], &[GroupLabel::G1]);
        assert!(matches!(
            evaluate_stratified(&a, &p, &l, "t", &EvalConfig::new(1)),
            Err(Error::UnassignedSample(s)) if s == "s1"
        ));
    }
}
