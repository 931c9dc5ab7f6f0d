use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use asrs_core::io::embeddings::write_embeddings;
use asrs_core::io::tables::{format_scores, read_groups, read_scores};
use asrs_core::{EmbeddingRecord, GroupLabel, SampleId, ScoreRecord};

fn asrs(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_asrs"))
        .args(args)
        .current_dir(dir)
        .env("SOURCE_DATE_EPOCH", "0")
        .env_remove("ASRS_THREADS")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_scores(path: &Path, values: &[f64]) {
    let recs: Vec<ScoreRecord> = values
        .iter()
        .enumerate()
        .map(|(i, &v)| ScoreRecord::new(SampleId::new(format!("s{i}")).unwrap(), v).unwrap())
        .collect();
    fs::write(path, format_scores(&recs, &[])).unwrap();
}

fn thresholds_json(dir: &Path, name: &str) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join(name)).unwrap()).unwrap()
}

#[test]
fn score_writes_one_row_per_sample() {
    let dir = tempfile::tempdir().unwrap();
    let recs: Vec<EmbeddingRecord> = (0..3)
        .map(|i| {
            let views = std::array::from_fn(|v| vec![i as f32, v as f32 * 3.0, 0.0, v as f32 * 4.0]);
            EmbeddingRecord::new(SampleId::new(format!("x{i}")).unwrap(), views).unwrap()
        })
        .collect();
    write_embeddings(&recs, dir.path().join("e.asrs")).unwrap();
    let o = asrs(dir.path(), &["score", "--embeddings", "e.asrs", "--out", "s.csv"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("s.csv")).unwrap();
    let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body, ["sample_id,score", "x0,50", "x1,50", "x2,50"]);
    assert!(text.contains("# timestamp: 1970-01-01T00:00:00Z"));
    assert!(text.contains("# input: e.asrs sha256:"));
}

#[test]
fn missing_input_exits_2_naming_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let o = asrs(dir.path(), &["score", "--embeddings", "no/such.asrs", "--out", "s.csv"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("no/such.asrs"), "{}", stderr(&o));
    assert!(!dir.path().join("s.csv").exists());
}

#[test]
fn thresholds_on_one_to_eight() {
    let dir = tempfile::tempdir().unwrap();
    write_scores(&dir.path().join("v.csv"), &[5.0, 1.0, 8.0, 3.0, 2.0, 7.0, 4.0, 6.0]);
    let o = asrs(dir.path(), &["thresholds", "--scores", "v.csv", "--out", "t.json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let t = thresholds_json(dir.path(), "t.json");
    assert_eq!(t["tau25"], 2.75);
    assert_eq!(t["tau50"], 4.5);
    assert_eq!(t["tau75"], 6.25);
    assert_eq!(t["n_val"], 8);
    assert_eq!(t["method"], "linear_interp_q7");
}

#[test]
fn thresholds_refuse_three_scores() {
    let dir = tempfile::tempdir().unwrap();
    write_scores(&dir.path().join("v.csv"), &[1.0, 2.0, 3.0]);
    let o = asrs(dir.path(), &["thresholds", "--scores", "v.csv", "--out", "t.json"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains('4'), "{}", stderr(&o));
    assert!(!dir.path().join("t.json").exists());
}

#[test]
fn permuted_scores_give_identical_thresholds() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let values: Vec<f64> = (0..50).map(|i| ((i * 37) % 50) as f64 / 7.0).collect();
    let scores: Vec<ScoreRecord> = values
        .iter()
        .enumerate()
        .map(|(i, &v)| ScoreRecord::new(SampleId::new(format!("s{i}")).unwrap(), v).unwrap())
        .collect();
    let mut permuted = scores.clone();
    permuted.reverse();
    permuted.swap(3, 17);
    fs::write(d.join("a.csv"), format_scores(&scores, &[])).unwrap();
    fs::write(d.join("b.csv"), format_scores(&permuted, &[])).unwrap();
    assert_eq!(code(&asrs(d, &["thresholds", "--scores", "a.csv", "--out", "a.json"])), 0);
    assert_eq!(code(&asrs(d, &["thresholds", "--scores", "b.csv", "--out", "b.json"])), 0);
    let (mut a, mut b) = (thresholds_json(d, "a.json"), thresholds_json(d, "b.json"));
    // run metadata names the input file; everything else must agree
    assert_ne!(a["metadata"], b["metadata"]);
    a.as_object_mut().unwrap().remove("metadata");
    b.as_object_mut().unwrap().remove("metadata");
    assert_eq!(a, b);
}

#[test]
fn group_assigns_boundaries_to_lower_group() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_scores(&d.join("v.csv"), &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]);
    fs::write(d.join("t.csv"), "sample_id,score\na,2.75\nb,4.5\nc,6.25\nd,6.26\ne,0\n").unwrap();
    assert_eq!(code(&asrs(d, &["thresholds", "--scores", "v.csv", "--out", "thr.json"])), 0);
    let o = asrs(d, &["group", "--scores", "t.csv", "--thresholds", "thr.json", "--out", "g.csv"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let g = read_groups(d.join("g.csv")).unwrap();
    let labels: Vec<GroupLabel> = g.records.iter().map(|r| r.group).collect();
    use GroupLabel::*;
    assert_eq!(labels, [G1, G2, G3, G4, G1]);
    assert!(g.comments.iter().any(|c| c.starts_with("thresholds: tau25=2.75")));
}

#[test]
fn leakage_guard_exits_3_for_the_fitting_set_or_a_reordered_copy() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_scores(&d.join("v.csv"), &[4.0, 1.0, 3.0, 2.0, 9.0]);
    assert_eq!(code(&asrs(d, &["thresholds", "--scores", "v.csv", "--out", "thr.json"])), 0);

    let mut copy = read_scores(d.join("v.csv")).unwrap().records;
    copy.rotate_left(2);
    fs::write(d.join("renamed.csv"), format_scores(&copy, &["an unrelated comment".into()])).unwrap();
    for scores in ["v.csv", "renamed.csv"] {
        let o = asrs(d, &["group", "--scores", scores, "--thresholds", "thr.json", "--out", "g.csv"]);
        assert_eq!(code(&o), 3, "{scores}: {}", stderr(&o));
        assert!(stderr(&o).contains("validation"), "{}", stderr(&o));
        assert!(!d.join("g.csv").exists());
    }
}

fn synth_and_group(d: &Path) {
    let steps: [&[&str]; 5] = [
        &["synth", "--out-dir", "data", "--n-val", "400", "--n-test", "400", "--tasks", "Edema,Cardiomegaly"],
        &["score", "--embeddings", "data/val_embeddings.asrs", "--out", "val.csv"],
        &["score", "--embeddings", "data/test_embeddings.asrs", "--out", "test.csv"],
        &["thresholds", "--scores", "val.csv", "--out", "thr.json"],
        &["group", "--scores", "test.csv", "--thresholds", "thr.json", "--out", "groups.csv"],
    ];
    for args in steps {
        let o = asrs(d, args);
        assert_eq!(code(&o), 0, "{args:?}: {}", stderr(&o));
    }
}

const REPORT: [&str; 9] =
    ["report", "--groups", "groups.csv", "--predictions", "data/predictions.csv", "--labels", "data/labels.csv", "--seed", "3"];

#[test]
fn unknown_task_exits_2_listing_available_tasks() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth_and_group(d);
    let o = asrs(d, &[&REPORT[..], &["--tasks", "Edema,Atelectasis", "--out", "r.json"]].concat());
    assert_eq!(code(&o), 2);
    let err = stderr(&o);
    assert!(err.contains("Atelectasis") && err.contains("Edema") && err.contains("Cardiomegaly"), "{err}");
    assert!(!d.join("r.json").exists());
}

#[test]
fn report_formats_and_seed_requirement() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth_and_group(d);
    for (fmt, check) in [("json", "\"overconfident_unstable\""), ("csv", "section,task,group,metric,value,note"), ("text", "Mean confidence by group")] {
        let out = format!("r.{fmt}");
        let o = asrs(d, &[&REPORT[..], &["--cohort", "data/cohort.csv", "--reps", "5", "--format", fmt, "--out", &out]].concat());
        assert_eq!(code(&o), 0, "{fmt}: {}", stderr(&o));
        let text = fs::read_to_string(d.join(&out)).unwrap();
        assert!(text.contains(check), "{fmt}");
        assert!(text.contains("seed"), "{fmt}");
    }
    let no_seed = asrs(d, &["report", "--groups", "groups.csv", "--predictions", "data/predictions.csv", "--labels", "data/labels.csv", "--out", "x.json"]);
    assert_eq!(code(&no_seed), 2);
    let bad_format = asrs(d, &[&REPORT[..], &["--format", "xml", "--out", "x.json"]].concat());
    assert_eq!(code(&bad_format), 2);
    assert!(!d.join("x.json").exists());
}

#[test]
fn bad_thread_setting_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    write_scores(&dir.path().join("v.csv"), &[1.0, 2.0, 3.0, 4.0]);
    let o = Command::new(env!("CARGO_BIN_EXE_asrs"))
        .args(["thresholds", "--scores", "v.csv", "--out", "t.json"])
        .current_dir(dir.path())
        .env("ASRS_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("ASRS_THREADS"));
}

#[test]
fn synth_miss_rates_take_exactly_four_values() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let ok = asrs(d, &["synth", "--out-dir", "a", "--n-val", "20", "--n-test", "20", "--miss-rates", "0.1,0.2,0.3,0.4"]);
    assert_eq!(code(&ok), 0, "{}", stderr(&ok));
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("a/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["miss_rate_by_quartile"], serde_json::json!([0.1, 0.2, 0.3, 0.4]));
    let three = asrs(d, &["synth", "--out-dir", "b", "--miss-rates", "0.1,0.2,0.3"]);
    assert_eq!(code(&three), 2);
    assert!(stderr(&three).contains("four"), "{}", stderr(&three));
}
