//! The stratified reliability report: per-group metrics, confidence and
//! demographics for one set of predictions, with JSON, tidy CSV and aligned
//! text renderings.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::confidence::{confidence_rows, overconfident_unstable, ConfidenceRow};
use crate::demographics::{delta_row, summarize_cohort, summarize_groups, CohortOverview, DemographicsDelta, DemographicsSummary};
use crate::error::{Error, Result};
use crate::evaluation::{evaluate_samples, join_task, task_names, EvalConfig, MetricsRow};
use crate::metadata::RunMetadata;
use crate::metric::{Metric, UndefinedReason};
use crate::model::{CohortRecord, GroupAssignment, GroupLabel, LabelRecord, PredictionRecord, Race, Sex};

pub const RESAMPLING_NOTE: &str = "each non-anchor group is resampled to the anchor group's prevalence by drawing \
floor(target * n_other / (1 - target)) members of the over-represented class without replacement; \
the other class is kept whole; recall and AUROC are averaged over reps";
pub const FLAG_RULE: &str = "a group is flagged when its mean confidence is strictly the highest and its recall strictly the lowest";
pub const DEMOGRAPHICS_UNIT: &str = "image";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub run: RunMetadata,
    pub threshold: f64,
    pub threshold_rule: String,
    pub quantile_method: Option<String>,
    pub resample_anchor: GroupLabel,
    pub reps: usize,
    pub seed: u64,
    pub resampling: String,
    pub flag_rule: String,
    pub demographics_unit: String,
    /// Grouped samples with no cohort record.
    pub missing_cohort: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskReport {
    pub task: String,
    pub n: usize,
    pub n_pos: usize,
    pub prevalence: Metric,
    pub metrics: Vec<MetricsRow>,
    pub confidence: Vec<ConfidenceRow>,
    pub overconfident_unstable: Option<GroupLabel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratifiedReport {
    pub metadata: ReportMetadata,
    pub tasks: Vec<TaskReport>,
    pub demographics: DemographicsSummary,
    pub demographics_delta: DemographicsDelta,
    pub cohort: CohortOverview,
}

pub struct ReportInputs<'a> {
    pub assignments: &'a [GroupAssignment],
    pub predictions: &'a [PredictionRecord],
    pub labels: &'a [LabelRecord],
    pub cohort: &'a [CohortRecord],
    /// Defaults to every task, in order of first appearance.
    pub tasks: Option<&'a [String]>,
    pub quantile_method: Option<String>,
}

pub fn task_report(
    assignments: &[GroupAssignment],
    preds: &[PredictionRecord],
    labels: &[LabelRecord],
    task: &str,
    cfg: &EvalConfig,
) -> Result<TaskReport> {
    let samples = join_task(assignments, preds, labels, task)?;
    let metrics = evaluate_samples(&samples, cfg)?;
    let confidence = confidence_rows(&samples)?;
    let n_pos = samples.labels.iter().filter(|&&y| y).count();
    Ok(TaskReport {
        task: task.to_string(),
        n: samples.labels.len(),
        n_pos,
        prevalence: Metric::ratio(n_pos as f64, samples.labels.len() as f64, UndefinedReason::EmptyGroup),
        overconfident_unstable: overconfident_unstable(&confidence, &metrics),
        metrics,
        confidence,
    })
}

pub fn build_report(inputs: &ReportInputs<'_>, cfg: &EvalConfig, run: RunMetadata) -> Result<StratifiedReport> {
    let tasks = match inputs.tasks {
        Some([]) => return Err(Error::InvalidConfig("task list is empty".into())),
        Some(t) => t.to_vec(),
        None => task_names(inputs.predictions),
    };
    if tasks.is_empty() {
        return Err(Error::EmptyInput);
    }
    let tasks = tasks
        .iter()
        .map(|t| task_report(inputs.assignments, inputs.predictions, inputs.labels, t, cfg))
        .collect::<Result<Vec<_>>>()?;
    let demographics = summarize_groups(inputs.assignments, inputs.cohort);
    let demographics_delta = delta_row(&demographics.rows, GroupLabel::G1, GroupLabel::G4)?;
    Ok(StratifiedReport {
        metadata: ReportMetadata {
            run,
            threshold: cfg.threshold,
            threshold_rule: format!("prob >= {}", cfg.threshold),
            quantile_method: inputs.quantile_method.clone(),
            resample_anchor: cfg.anchor,
            reps: cfg.reps,
            seed: cfg.seed,
            resampling: RESAMPLING_NOTE.to_string(),
            flag_rule: FLAG_RULE.to_string(),
            demographics_unit: DEMOGRAPHICS_UNIT.to_string(),
            missing_cohort: demographics.missing_cohort,
        },
        tasks,
        demographics_delta,
        demographics,
        cohort: summarize_cohort(inputs.cohort),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
    Text,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "text" => Ok(ReportFormat::Text),
            other => Err(Error::InvalidConfig(format!("unknown format {other:?}; expected json, csv or text"))),
        }
    }
}

impl StratifiedReport {
    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Json => self.to_json(),
            ReportFormat::Csv => self.to_csv(),
            ReportFormat::Text => self.to_text(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn comment_lines(&self) -> Vec<String> {
        let m = &self.metadata;
        let mut lines = m.run.comment_lines();
        lines.push(format!("threshold_rule: {}", m.threshold_rule));
        lines.push(format!("quantile_method: {}", m.quantile_method.as_deref().unwrap_or("unknown")));
        lines.push(format!("resample_anchor: {}", m.resample_anchor));
        lines.push(format!("reps: {}", m.reps));
        lines.push(format!("resample_seed: {}", m.seed));
        lines.push(format!("resampling: {}", m.resampling));
        lines.push(format!("flag_rule: {}", m.flag_rule));
        lines.push(format!("demographics_unit: {}", m.demographics_unit));
        lines.push(format!("missing_cohort: {}", m.missing_cohort));
        lines
    }

    /// Long format: `section,task,group,metric,value,note`. Undefined
    /// metrics have an empty value and their reason code in `note`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for c in self.comment_lines() {
            let _ = writeln!(out, "# {c}");
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["section", "task", "group", "metric", "value", "note"]).unwrap();
        let mut put = |section: &str, task: &str, group: &str, metric: &str, m: Metric| {
            let (value, note) = match m {
                Metric::Value(v) => (v.to_string(), String::new()),
                Metric::Undefined { undefined } => (String::new(), serde_json::to_value(undefined).unwrap().as_str().unwrap().to_string()),
            };
            w.write_record([section, task, group, metric, &value, &note]).unwrap();
        };
        let count = |n: usize| Metric::Value(n as f64);
        for t in &self.tasks {
            put("task", &t.task, "", "n", count(t.n));
            put("task", &t.task, "", "n_pos", count(t.n_pos));
            put("task", &t.task, "", "prevalence", t.prevalence);
            for r in &t.metrics {
                let g = r.group.as_str();
                put("metrics", &t.task, g, "n", count(r.n));
                put("metrics", &t.task, g, "n_pos", count(r.n_pos));
                put("metrics", &t.task, g, "prevalence", r.prevalence);
                put("metrics", &t.task, g, "tp", count(r.confusion.tp as usize));
                put("metrics", &t.task, g, "fp", count(r.confusion.fp as usize));
                put("metrics", &t.task, g, "tn", count(r.confusion.tn as usize));
                put("metrics", &t.task, g, "fn", count(r.confusion.fn_ as usize));
                put("metrics", &t.task, g, "precision", r.precision);
                put("metrics", &t.task, g, "recall", r.recall);
                put("metrics", &t.task, g, "auroc", r.auroc);
                if let Some(rs) = &r.resampled {
                    put("metrics", &t.task, g, "target_prevalence", rs.target_prevalence);
                    put("metrics", &t.task, g, "recall_resampled", rs.recall);
                    put("metrics", &t.task, g, "recall_resampled_sd", rs.recall_sd);
                    put("metrics", &t.task, g, "auroc_resampled", rs.auroc);
                    put("metrics", &t.task, g, "auroc_resampled_sd", rs.auroc_sd);
                }
            }
            for c in &t.confidence {
                let g = c.group.as_str();
                put("confidence", &t.task, g, "n", count(c.n));
                put("confidence", &t.task, g, "mean_overall", c.mean_overall);
                put("confidence", &t.task, g, "mean_pos", c.mean_pos);
                put("confidence", &t.task, g, "mean_neg", c.mean_neg);
            }
            let flag = t.overconfident_unstable.map(GroupLabel::as_str).unwrap_or("");
            put("flag", &t.task, flag, "overconfident_unstable", count(usize::from(!flag.is_empty())));
        }
        for r in &self.demographics.rows {
            let g = r.group.as_str();
            put("demographics", "", g, "n", count(r.n));
            put("demographics", "", g, "age_mean", r.age_mean);
            put("demographics", "", g, "age_missing", count(r.age_missing));
            for s in Sex::ALL {
                put("demographics", "", g, &format!("sex_pct:{}", s.as_str()), r.sex_pct[&s]);
            }
            for race in Race::ALL {
                put("demographics", "", g, &format!("race_pct:{}", race.as_str()), r.race_pct[&race]);
            }
        }
        let d = &self.demographics_delta;
        let pair = format!("{}-{}", d.to, d.from);
        put("demographics_delta", "", &pair, "age_mean", d.age_mean);
        for s in Sex::ALL {
            put("demographics_delta", "", &pair, &format!("sex_pct:{}", s.as_str()), d.sex_pct[&s]);
        }
        for race in Race::ALL {
            put("demographics_delta", "", &pair, &format!("race_pct:{}", race.as_str()), d.race_pct[&race]);
        }
        let c = &self.cohort;
        put("cohort", "", "", "n", count(c.n));
        put("cohort", "", "", "age_mean", c.age_mean);
        put("cohort", "", "", "age_sd", c.age_sd);
        put("cohort", "", "", "age_missing", count(c.age_missing));
        for s in Sex::ALL {
            put("cohort", "", "", &format!("sex_pct:{}", s.as_str()), c.sex_pct[&s]);
        }
        for race in Race::ALL {
            put("cohort", "", "", &format!("race_pct:{}", race.as_str()), c.race_pct[&race]);
        }
        out.push_str(std::str::from_utf8(&w.into_inner().unwrap()).unwrap());
        out
    }

    pub fn to_text(&self) -> String {
        let m = &self.metadata;
        let mut out = String::new();
        for c in self.comment_lines() {
            let _ = writeln!(out, "# {c}");
        }
        let _ = writeln!(
            out,
            "\nPer-group metrics (positive call: {}; (R) = resampled to {} prevalence, {} reps)",
            m.threshold_rule, m.resample_anchor, m.reps
        );
        out.push_str(&metrics_table(&self.tasks, m.resample_anchor));
        out.push_str("\nMean confidence by group\n");
        out.push_str(&confidence_table(&self.tasks));
        out.push_str("\nOverconfident-unstable groups\n");
        for t in &self.tasks {
            let flag = t.overconfident_unstable.map(GroupLabel::as_str).unwrap_or("none");
            let _ = writeln!(out, "{}: {flag}", t.task);
        }
        out.push_str("\nPrevalence (%)\n");
        for t in &self.tasks {
            let _ = writeln!(out, "{}: {}", t.task, t.prevalence.map(|p| 100.0 * p).fixed(1));
        }
        let _ = writeln!(out, "\nDemographics by group (per {})", m.demographics_unit);
        out.push_str(&demographics_table(&self.demographics, &self.demographics_delta));
        out.push_str("\nCohort\n");
        out.push_str(&cohort_table(&[("All".to_string(), self.cohort.clone())]));
        out
    }
}

#[derive(Clone, Copy)]
enum Align {
    Left,
    Right,
}

/// Lays out rows with per-column widths and two spaces between columns.
fn grid(rows: &[Vec<String>], align: impl Fn(usize) -> Align) -> String {
    let ncol = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..ncol)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in rows {
        let mut line = String::new();
        for (c, cell) in row.iter().enumerate() {
            if c > 0 {
                line.push_str("  ");
            }
            let w = widths[c];
            match align(c) {
                Align::Left => {
                    let _ = write!(line, "{cell:<w$}");
                }
                Align::Right => {
                    let _ = write!(line, "{cell:>w$}");
                }
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

fn text_align(c: usize) -> Align {
    if c == 0 {
        Align::Left
    } else {
        Align::Right
    }
}

/// Integer with comma thousands separators.
pub fn thousands(n: usize) -> String {
    let digits = n.to_string();
    let mut out = String::new();
    for (i, ch) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(ch);
    }
    out
}

/// Signed two-decimal rendering used for deltas.
pub fn signed(m: Metric) -> String {
    match m {
        Metric::Value(v) => format!("{v:+.2}"),
        u => u.fixed(2),
    }
}

pub fn metrics_table(tasks: &[TaskReport], anchor: GroupLabel) -> String {
    let mut groups_row = vec!["Task".to_string()];
    let mut header = vec![String::new()];
    for g in GroupLabel::ALL {
        let cols: &[&str] = if g == anchor {
            &["Prec.", "Rec.", "AUC"]
        } else {
            &["Prec.", "Rec.", "AUC", "Rec.(R)", "AUC(R)"]
        };
        groups_row.push(g.to_string());
        groups_row.extend(std::iter::repeat_n(String::new(), cols.len() - 1));
        header.extend(cols.iter().map(|s| s.to_string()));
    }
    let mut rows = vec![groups_row, header];
    for t in tasks {
        let mut row = vec![t.task.clone()];
        for g in GroupLabel::ALL {
            let r = t.metrics.iter().find(|r| r.group == g);
            let resampled = r.and_then(|r| r.resampled.as_ref());
            let empty = Metric::undefined(UndefinedReason::EmptyGroup);
            row.extend([r.map(|r| r.precision), r.map(|r| r.recall), r.map(|r| r.auroc)].map(|m| m.unwrap_or(empty).fixed(3)));
            if g != anchor {
                row.extend([resampled.map(|s| s.recall), resampled.map(|s| s.auroc)].map(|m| m.unwrap_or(empty).fixed(3)));
            }
        }
        rows.push(row);
    }
    grid(&rows, text_align)
}

pub fn confidence_table(tasks: &[TaskReport]) -> String {
    let mut groups_row = vec!["Task".to_string()];
    let mut header = vec![String::new()];
    for g in GroupLabel::ALL {
        groups_row.extend([g.to_string(), String::new(), String::new()]);
        header.extend(["Ovr.", "Pos.", "Neg."].map(String::from));
    }
    let mut rows = vec![groups_row, header];
    for t in tasks {
        let mut row = vec![t.task.clone()];
        for g in GroupLabel::ALL {
            match t.confidence.iter().find(|c| c.group == g) {
                Some(c) => row.extend([c.mean_overall.fixed(3), c.mean_pos.fixed(3), c.mean_neg.fixed(3)]),
                None => row.extend(std::iter::repeat_n("n/a".to_string(), 3)),
            }
        }
        rows.push(row);
    }
    grid(&rows, text_align)
}

pub fn demographics_table(summary: &DemographicsSummary, delta: &DemographicsDelta) -> String {
    let row_of = |g: GroupLabel| summary.rows.iter().find(|r| r.group == g);
    let mut rows = vec![{
        let mut h = vec!["Indicator".to_string()];
        h.extend(GroupLabel::ALL.iter().map(|g| g.to_string()));
        h.push(format!("{} vs. {}", delta.to, delta.from));
        h
    }];
    let mut line = |label: String, cell: &dyn Fn(GroupLabel) -> String, d: String| {
        let mut r = vec![label];
        r.extend(GroupLabel::ALL.iter().map(|&g| cell(g)));
        r.push(d);
        rows.push(r);
    };
    line("N (images)".into(), &|g| row_of(g).map_or("0".into(), |r| thousands(r.n)), "--".into());
    line(
        "Age, mean (years)".into(),
        &|g| row_of(g).map_or("n/a".into(), |r| r.age_mean.fixed(2)),
        signed(delta.age_mean),
    );
    for s in Sex::ALL {
        line(
            format!("{} (%)", s.label()),
            &|g| row_of(g).map_or("n/a".into(), |r| r.sex_pct[&s].fixed(2)),
            signed(delta.sex_pct[&s]),
        );
    }
    for race in Race::ALL {
        line(
            format!("{} (%)", race.as_str()),
            &|g| row_of(g).map_or("n/a".into(), |r| r.race_pct[&race].fixed(2)),
            signed(delta.race_pct[&race]),
        );
    }
    line(
        "Age missing".into(),
        &|g| row_of(g).map_or("0".into(), |r| thousands(r.age_missing)),
        "--".into(),
    );
    grid(&rows, text_align)
}

/// Cohort characteristics at one decimal, one row per named split.
pub fn cohort_table(splits: &[(String, CohortOverview)]) -> String {
    let mut header = vec!["Split".to_string(), "Images".into(), "Age (mean±SD)".into()];
    header.extend(Sex::ALL.iter().map(|s| format!("{} %", s.label())));
    header.extend(Race::ALL.iter().map(|r| format!("{} %", r.as_str())));
    let mut rows = vec![header];
    for (name, c) in splits {
        let mut r = vec![
            name.clone(),
            thousands(c.n),
            match (c.age_mean, c.age_sd) {
                (Metric::Value(m), Metric::Value(sd)) => format!("{m:.1} ± {sd:.1}"),
                (m, _) => m.fixed(1),
            },
        ];
        r.extend(Sex::ALL.iter().map(|s| c.sex_pct[s].fixed(1)));
        r.extend(Race::ALL.iter().map(|race| c.race_pct[race].fixed(1)));
        rows.push(r);
    }
    grid(&rows, text_align)
}
