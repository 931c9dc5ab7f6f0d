//! Published cohort, metric, confidence and demographic tables as test
//! fixtures.
//!
//! [`tables`] holds the printed cells. The functions here turn them into the
//! report structures the toolkit renders, and [`build`] goes further by
//! constructing records whose computed statistics print as the same cells.

pub mod build;
pub mod check;
pub mod tables;

use std::collections::BTreeMap;

use asrs_core::confidence::{overconfident_unstable, ConfidenceRow};
use asrs_core::demographics::{delta_row, CohortOverview, DemographicsDelta, DemographicsRow, DemographicsSummary};
use asrs_core::evaluation::{ConfusionCounts, MetricsRow, ResampledMetrics, DEFAULT_ANCHOR, DEFAULT_REPS, DEFAULT_THRESHOLD};
use asrs_core::metadata::RunMetadata;
use asrs_core::report::{ReportMetadata, StratifiedReport, TaskReport, DEMOGRAPHICS_UNIT, FLAG_RULE, RESAMPLING_NOTE};
use asrs_core::{GroupLabel, Metric, Race, Sex, UndefinedReason};

use tables::{cells, num, SplitLine, GROUP_DEMOGRAPHICS};

fn not_reported() -> Metric {
    Metric::undefined(UndefinedReason::NotReported)
}

/// A task report holding the printed metric and confidence cells.
pub fn transcribed_task_report(task: &str, model: &str) -> TaskReport {
    let m: Vec<f64> = cells(tables::metrics_line(task, model).cells).into_iter().map(num).collect();
    let c: Vec<f64> = cells(tables::confidence_line(task, model).cells).into_iter().map(num).collect();
    let metrics: Vec<MetricsRow> = GroupLabel::ALL
        .iter()
        .map(|&group| {
            let base = 5 * group.index();
            let resampled = (group != GroupLabel::G4).then(|| ResampledMetrics {
                target_prevalence: not_reported(),
                reps: DEFAULT_REPS,
                recall: Metric::Value(m[base + 3]),
                recall_sd: not_reported(),
                auroc: Metric::Value(m[base + 4]),
                auroc_sd: not_reported(),
            });
            MetricsRow {
                task: task.to_string(),
                group,
                n: 0,
                n_pos: 0,
                prevalence: not_reported(),
                confusion: ConfusionCounts::default(),
                precision: Metric::Value(m[base]),
                recall: Metric::Value(m[base + 1]),
                auroc: Metric::Value(m[base + 2]),
                resampled,
            }
        })
        .collect();
    let confidence: Vec<ConfidenceRow> = GroupLabel::ALL
        .iter()
        .map(|&group| {
            let base = 3 * group.index();
            ConfidenceRow {
                task: task.to_string(),
                group,
                n: 0,
                n_pos: 0,
                n_neg: 0,
                mean_overall: Metric::Value(c[base]),
                mean_pos: Metric::Value(c[base + 1]),
                mean_neg: Metric::Value(c[base + 2]),
            }
        })
        .collect();
    TaskReport {
        task: task.to_string(),
        n: 0,
        n_pos: 0,
        prevalence: Metric::Value(num(tables::test_prevalence(task)) / 100.0),
        overconfident_unstable: overconfident_unstable(&confidence, &metrics),
        metrics,
        confidence,
    }
}

/// Group demographics as printed, with the G4 vs G1 delta computed from
/// them. Unprinted shares are marked as not reported.
pub fn transcribed_demographics() -> (DemographicsSummary, DemographicsDelta) {
    let d = &GROUP_DEMOGRAPHICS;
    let rows: Vec<DemographicsRow> = GroupLabel::ALL
        .iter()
        .map(|&group| {
            let g = group.index();
            let female = num(d.female[g]);
            let sex_pct = BTreeMap::from([
                (Sex::Female, Metric::Value(female)),
                (Sex::Male, Metric::Value(asrs_core::metric::round_to(100.0 - female, 2))),
                (Sex::OtherUnknown, Metric::Value(0.0)),
            ]);
            let race_pct = BTreeMap::from([
                (Race::White, Metric::Value(num(d.white[g]))),
                (Race::Black, Metric::Value(num(d.black[g]))),
                (Race::Asian, not_reported()),
                (Race::HispanicLatino, Metric::Value(num(d.hispanic[g]))),
                (Race::OtherUnknown, not_reported()),
            ]);
            DemographicsRow {
                group,
                n: d.n[g],
                age_mean: Metric::Value(num(d.age[g])),
                age_missing: 0,
                sex_pct,
                race_pct,
            }
        })
        .collect();
    let delta = delta_row(&rows, GroupLabel::G1, GroupLabel::G4).expect("all groups present");
    (DemographicsSummary { rows, missing_cohort: 0 }, delta)
}

/// One cohort split as printed.
pub fn transcribed_overview(line: &SplitLine) -> CohortOverview {
    let female = num(line.female);
    CohortOverview {
        n: line.images,
        age_mean: Metric::Value(num(line.age_mean)),
        age_sd: Metric::Value(num(line.age_sd)),
        age_missing: 0,
        sex_pct: BTreeMap::from([
            (Sex::Female, Metric::Value(female)),
            (Sex::Male, Metric::Value(100.0 - female)),
            (Sex::OtherUnknown, Metric::Value(0.0)),
        ]),
        race_pct: BTreeMap::from([
            (Race::White, Metric::Value(num(line.white))),
            (Race::Black, Metric::Value(num(line.black))),
            (Race::Asian, Metric::Value(num(line.asian))),
            (Race::HispanicLatino, Metric::Value(num(line.hispanic))),
            (Race::OtherUnknown, Metric::Value(num(line.other))),
        ]),
    }
}

/// A full report for one model assembled from printed cells, with the test
/// split as its cohort overview.
pub fn transcribed_report(model: &str) -> StratifiedReport {
    let (demographics, demographics_delta) = transcribed_demographics();
    let test_split = tables::COHORT_SPLITS.iter().find(|s| s.split == "Test").expect("test split");
    StratifiedReport {
        metadata: ReportMetadata {
            run: RunMetadata::new(vec![format!("transcribed {model}")], "1970-01-01T00:00:00Z".into()),
            threshold: DEFAULT_THRESHOLD,
            threshold_rule: format!("prob >= {DEFAULT_THRESHOLD}"),
            quantile_method: None,
            resample_anchor: DEFAULT_ANCHOR,
            reps: DEFAULT_REPS,
            seed: 0,
            resampling: RESAMPLING_NOTE.into(),
            flag_rule: FLAG_RULE.into(),
            demographics_unit: DEMOGRAPHICS_UNIT.into(),
            missing_cohort: 0,
        },
        tasks: tables::TASKS.iter().map(|t| transcribed_task_report(t, model)).collect(),
        demographics,
        demographics_delta,
        cohort: transcribed_overview(test_split),
    }
}
