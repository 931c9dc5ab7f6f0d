//! File-to-file steps behind each command: read inputs, compute, render the
//! artifact with its run metadata, write atomically.
//!
//! The `*_artifact` functions are the in-memory halves, so a chain of
//! commands can be compared byte for byte with direct library calls.

use std::path::Path;

use crate::error::{Error, Result};
use crate::evaluation::EvalConfig;
use crate::grouping::{assign_batch, fit_thresholds, scores_digest, GroupThresholds};
use crate::io::embeddings::read_embeddings;
use crate::io::tables::{format_groups, format_scores, read_cohort, read_groups, read_labels, read_predictions, read_scores, write_text};
use crate::metadata::{comment_value, RunMetadata};
use crate::model::{EmbeddingRecord, ScoreRecord};
use crate::report::{build_report, ReportFormat, ReportInputs};
use crate::scoring::score_batch;

/// How a command was invoked; becomes the artifact's run metadata.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Invocation {
    pub command_line: Vec<String>,
    pub timestamp: String,
}

impl Invocation {
    fn metadata(&self, inputs: &[&Path]) -> Result<RunMetadata> {
        let mut meta = RunMetadata::new(self.command_line.clone(), self.timestamp.clone());
        for p in inputs {
            meta.add_input(p)?;
        }
        Ok(meta)
    }
}

pub fn score_artifact(records: &[EmbeddingRecord], meta: &RunMetadata) -> Result<String> {
    let scores = score_batch(records)?;
    Ok(format_scores(&scores, &meta.comment_lines()))
}

pub fn thresholds_artifact(val_scores: &[ScoreRecord], meta: RunMetadata) -> Result<String> {
    let mut thr = fit_thresholds(val_scores)?;
    thr.metadata = Some(meta);
    Ok(thr.to_json())
}

/// Refuses to assign the very score set the thresholds were fitted on.
pub fn check_leakage(scores: &[ScoreRecord], thr: &GroupThresholds) -> Result<()> {
    let digest = scores_digest(scores);
    if thr.source_digest.as_deref() == Some(digest.as_str()) {
        return Err(Error::Leakage { digest });
    }
    Ok(())
}

pub fn groups_comment_lines(thr: &GroupThresholds, meta: &RunMetadata) -> Vec<String> {
    let mut lines = meta.comment_lines();
    lines.push(format!("thresholds: tau25={} tau50={} tau75={}", thr.tau25, thr.tau50, thr.tau75));
    lines.push(format!("n_val: {}", thr.n_val));
    lines.push(format!("quantile_method: {}", thr.method));
    if let Some(d) = &thr.source_digest {
        lines.push(format!("thresholds_source: sha256:{d}"));
    }
    lines
}

pub fn groups_artifact(test_scores: &[ScoreRecord], thr: &GroupThresholds, meta: &RunMetadata) -> Result<String> {
    check_leakage(test_scores, thr)?;
    let assignments = assign_batch(test_scores, thr)?;
    Ok(format_groups(&assignments, &groups_comment_lines(thr, meta)))
}

pub fn run_score(embeddings: &Path, out: &Path, inv: &Invocation) -> Result<()> {
    let meta = inv.metadata(&[embeddings])?;
    let records = read_embeddings(embeddings)?;
    let text = score_artifact(&records, &meta).map_err(|e| e.in_file(embeddings))?;
    write_text(out, &text)
}

pub fn run_thresholds(scores: &Path, out: &Path, inv: &Invocation) -> Result<()> {
    let meta = inv.metadata(&[scores])?;
    let table = read_scores(scores)?;
    let text = thresholds_artifact(&table.records, meta).map_err(|e| e.in_file(scores))?;
    write_text(out, &text)
}

pub fn run_group(scores: &Path, thresholds: &Path, out: &Path, inv: &Invocation) -> Result<()> {
    let meta = inv.metadata(&[scores, thresholds])?;
    let table = read_scores(scores)?;
    let thr = GroupThresholds::read(thresholds)?;
    let text = groups_artifact(&table.records, &thr, &meta).map_err(|e| match e {
        e @ Error::Leakage { .. } => e,
        e => e.in_file(scores),
    })?;
    write_text(out, &text)
}

pub struct ReportPaths<'a> {
    pub groups: &'a Path,
    pub predictions: &'a Path,
    pub labels: &'a Path,
    pub cohort: Option<&'a Path>,
}

/// Builds and renders the full report; nothing is written on error.
pub fn report_artifact(
    paths: &ReportPaths<'_>,
    tasks: Option<&[String]>,
    cfg: &EvalConfig,
    format: ReportFormat,
    inv: &Invocation,
) -> Result<String> {
    let mut inputs: Vec<&Path> = vec![paths.groups, paths.predictions, paths.labels];
    inputs.extend(paths.cohort);
    let meta = inv.metadata(&inputs)?.with_seed(cfg.seed);
    let groups = read_groups(paths.groups)?;
    let predictions = read_predictions(paths.predictions)?;
    let labels = read_labels(paths.labels)?;
    let cohort = match paths.cohort {
        Some(p) => read_cohort(p)?.records,
        None => Vec::new(),
    };
    let report = build_report(
        &ReportInputs {
            assignments: &groups.records,
            predictions: &predictions.records,
            labels: &labels.records,
            cohort: &cohort,
            tasks,
            quantile_method: comment_value(&groups.comments, "quantile_method").map(str::to_string),
        },
        cfg,
        meta,
    )?;
    Ok(report.render(format))
}

pub fn run_report(
    paths: &ReportPaths<'_>,
    tasks: Option<&[String]>,
    cfg: &EvalConfig,
    format: ReportFormat,
    out: &Path,
    inv: &Invocation,
) -> Result<()> {
    let text = report_artifact(paths, tasks, cfg, format, inv)?;
    write_text(out, &text)
}
