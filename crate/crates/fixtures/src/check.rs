//! Cell-by-cell comparison of rendered report text against the printed
//! tables. Each function returns one message per mismatching cell.

use asrs_core::report::thousands;

use crate::tables::{self, cells, SplitLine, GROUP_DEMOGRAPHICS};

/// Cells after `label` on the first line that starts with it.
pub fn row_cells<'a>(text: &'a str, label: &str) -> Option<Vec<&'a str>> {
    text.lines().find_map(|line| {
        let rest = line.strip_prefix(label)?;
        (rest.is_empty() || rest.starts_with(char::is_whitespace)).then(|| rest.split_whitespace().collect())
    })
}

fn compare(what: &str, got: &[&str], want: &[&str], skip: impl Fn(usize) -> bool) -> Vec<String> {
    if got.len() != want.len() {
        return vec![format!("{what}: {} cells rendered, {} printed: {got:?}", got.len(), want.len())];
    }
    got.iter()
        .zip(want)
        .enumerate()
        .filter(|&(i, (g, w))| !skip(i) && g != w)
        .map(|(i, (g, w))| format!("{what} cell {i}: rendered {g}, printed {w}"))
        .collect()
}

/// Which metric columns to compare.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricColumns {
    All,
    /// Skips the resampled columns.
    ThresholdAndRank,
}

pub fn metrics_row(text: &str, task: &str, model: &str, columns: MetricColumns) -> Vec<String> {
    let what = format!("metrics {task}/{model}");
    let Some(got) = row_cells(text, task) else {
        return vec![format!("{what}: row missing")];
    };
    let want = cells(tables::metrics_line(task, model).cells);
    let resampled = |i: usize| i < 15 && i % 5 >= 3;
    compare(&what, &got, &want, |i| columns == MetricColumns::ThresholdAndRank && resampled(i))
}

pub fn confidence_row(text: &str, task: &str, model: &str) -> Vec<String> {
    let what = format!("confidence {task}/{model}");
    // the metrics table comes first and shares row labels
    let Some(section) = text.split("Mean confidence by group").nth(1) else {
        return vec![format!("{what}: section missing")];
    };
    let Some(got) = row_cells(section, task) else {
        return vec![format!("{what}: row missing")];
    };
    compare(&what, &got, &cells(tables::confidence_line(task, model).cells), |_| false)
}

pub fn demographics(text: &str) -> Vec<String> {
    let d = &GROUP_DEMOGRAPHICS;
    let n: Vec<String> = d.n.iter().map(|&n| thousands(n)).collect();
    let mut want_n: Vec<&str> = n.iter().map(String::as_str).collect();
    want_n.push("--");
    let rows: [(&str, Vec<&str>); 6] = [
        ("N (images)", want_n),
        ("Age, mean (years)", [&d.age[..], &[d.delta[0]]].concat()),
        ("Female (%)", [&d.female[..], &[d.delta[1]]].concat()),
        ("White (%)", [&d.white[..], &[d.delta[2]]].concat()),
        ("Black (%)", [&d.black[..], &[d.delta[3]]].concat()),
        ("Hispanic/Latino (%)", [&d.hispanic[..], &[d.delta[4]]].concat()),
    ];
    rows.iter()
        .flat_map(|(label, want)| match row_cells(text, label) {
            Some(got) => compare(&format!("demographics {label}"), &got, want, |_| false),
            None => vec![format!("demographics {label}: row missing")],
        })
        .collect()
}

/// Compares a cohort-table row rendered under `label` with a split line.
/// Male and Other/Unknown sex shares are not printed and not compared.
pub fn cohort_row(text: &str, label: &str, line: &SplitLine) -> Vec<String> {
    let what = format!("cohort {label}");
    let Some(got) = row_cells(text, label) else {
        return vec![format!("{what}: row missing")];
    };
    let images = thousands(line.images);
    let want = [
        images.as_str(),
        line.age_mean,
        "±",
        line.age_sd,
        line.female,
        "-",
        "-",
        line.white,
        line.black,
        line.asian,
        line.hispanic,
        line.other,
    ];
    compare(&what, &got, &want, |i| i == 5 || i == 6)
}

pub fn prevalence(text: &str, task: &str) -> Vec<String> {
    let Some(section) = text.split("Prevalence (%)").nth(1) else {
        return vec!["prevalence section missing".into()];
    };
    let label = format!("{task}:");
    match row_cells(section, &label) {
        Some(got) => compare(&format!("prevalence {task}"), &got, &[tables::test_prevalence(task)], |_| false),
        None => vec![format!("prevalence {task}: row missing")],
    }
}
