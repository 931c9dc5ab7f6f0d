//! Comma-delimited tables with a mandatory header row.
//!
//! A table may start with `#` comment lines carrying run metadata; they are
//! kept verbatim and never mixed with data rows. Columns are matched by
//! header name, so extra columns are tolerated and order is free.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{
    CohortRecord, GroupAssignment, GroupLabel, LabelRecord, PredictionRecord, Race, SampleId,
    ScoreRecord, Sex,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schema {
    Scores,
    Groups,
    Predictions,
    Labels,
    Cohort,
}

impl Schema {
    pub fn columns(self) -> &'static [&'static str] {
        match self {
            Schema::Scores => &["sample_id", "score"],
            Schema::Groups => &["sample_id", "group"],
            Schema::Predictions => &["sample_id", "task", "prob"],
            Schema::Labels => &["sample_id", "task", "label"],
            Schema::Cohort => &["sample_id", "age", "sex", "race"],
        }
    }
}

/// Parsed table plus its comment preamble.
#[derive(Debug, Clone, PartialEq)]
pub struct Table<T> {
    pub comments: Vec<String>,
    pub records: Vec<T>,
    /// Non-fatal findings, such as category strings mapped to a catch-all.
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AnyTable {
    Scores(Table<ScoreRecord>),
    Groups(Table<GroupAssignment>),
    Predictions(Table<PredictionRecord>),
    Labels(Table<LabelRecord>),
    Cohort(Table<CohortRecord>),
}

impl AnyTable {
    pub fn len(&self) -> usize {
        match self {
            AnyTable::Scores(t) => t.records.len(),
            AnyTable::Groups(t) => t.records.len(),
            AnyTable::Predictions(t) => t.records.len(),
            AnyTable::Labels(t) => t.records.len(),
            AnyTable::Cohort(t) => t.records.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn read_table(path: impl AsRef<Path>, schema: Schema) -> Result<AnyTable> {
    let path = path.as_ref();
    let text = read_text(path)?;
    let table = match schema {
        Schema::Scores => parse_scores(&text).map(AnyTable::Scores),
        Schema::Groups => parse_groups(&text).map(AnyTable::Groups),
        Schema::Predictions => parse_predictions(&text).map(AnyTable::Predictions),
        Schema::Labels => parse_labels(&text).map(AnyTable::Labels),
        Schema::Cohort => parse_cohort(&text).map(AnyTable::Cohort),
    };
    table.map_err(|e| e.in_file(path))
}

macro_rules! typed_reader {
    ($name:ident, $parse:ident, $ty:ty) => {
        pub fn $name(path: impl AsRef<Path>) -> Result<Table<$ty>> {
            let path = path.as_ref();
            $parse(&read_text(path)?).map_err(|e| e.in_file(path))
        }
    };
}

typed_reader!(read_scores, parse_scores, ScoreRecord);
typed_reader!(read_groups, parse_groups, GroupAssignment);
typed_reader!(read_predictions, parse_predictions, PredictionRecord);
typed_reader!(read_labels, parse_labels, LabelRecord);
typed_reader!(read_cohort, parse_cohort, CohortRecord);

/// Splits off the `#` preamble; returns comments, the body and the number of
/// lines consumed by the preamble.
fn split_preamble(text: &str) -> (Vec<String>, &str, u64) {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut comments = Vec::new();
    let mut offset = 0;
    let mut lines = 0;
    for line in text.split_inclusive('\n') {
        let Some(rest) = line.strip_prefix('#') else { break };
        let rest = rest.trim_end_matches(['\n', '\r']);
        comments.push(rest.strip_prefix(' ').unwrap_or(rest).to_string());
        offset += line.len();
        lines += 1;
    }
    (comments, &text[offset..], lines)
}

struct Rows<'a> {
    comments: Vec<String>,
    body: &'a str,
    line_offset: u64,
    index: Vec<usize>,
}

fn open(text: &str, schema: Schema) -> Result<Rows<'_>> {
    let (comments, body, line_offset) = split_preamble(text);
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(body.as_bytes());
    let headers = reader.headers().map_err(|e| Error::BadValue {
        line: line_offset + 1,
        column: "<header>".into(),
        value: String::new(),
        reason: e.to_string(),
    })?;
    let mut index = Vec::new();
    for col in schema.columns() {
        let pos = headers
            .iter()
            .position(|h| h == *col)
            .ok_or_else(|| Error::MissingColumn(col.to_string()))?;
        index.push(pos);
    }
    Ok(Rows {
        comments,
        body,
        line_offset,
        index,
    })
}

/// A data row with its file line number and fields in schema column order.
struct Row {
    line: u64,
    fields: Vec<String>,
}

impl Rows<'_> {
    fn rows(&self, schema: Schema) -> Result<Vec<Row>> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .flexible(false)
            .from_reader(self.body.as_bytes());
        let mut out = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line()) + self.line_offset;
                Error::BadValue {
                    line,
                    column: "<row>".into(),
                    value: String::new(),
                    reason: e.to_string(),
                }
            })?;
            let line = rec.position().map_or(0, |p| p.line()) + self.line_offset;
            if rec.iter().all(str::is_empty) {
                continue;
            }
            let fields = self
                .index
                .iter()
                .zip(schema.columns())
                .map(|(&i, col)| {
                    rec.get(i).map(str::to_string).ok_or_else(|| Error::BadValue {
                        line,
                        column: col.to_string(),
                        value: String::new(),
                        reason: "field missing".into(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            out.push(Row { line, fields });
        }
        Ok(out)
    }
}

fn bad(line: u64, column: &str, value: &str, reason: impl Into<String>) -> Error {
    Error::BadValue {
        line,
        column: column.into(),
        value: value.into(),
        reason: reason.into(),
    }
}

fn sample_id(row: &Row) -> Result<SampleId> {
    SampleId::new(row.fields[0].as_str()).map_err(|e| bad(row.line, "sample_id", &row.fields[0], e.to_string()))
}

fn real(row: &Row, col: usize, name: &str) -> Result<f64> {
    let raw = &row.fields[col];
    let v: f64 = raw
        .parse()
        .map_err(|_| bad(row.line, name, raw, "not a number"))?;
    if !v.is_finite() {
        return Err(bad(row.line, name, raw, "not finite"));
    }
    Ok(v)
}

fn parse_with<T, K: std::hash::Hash + Eq>(
    text: &str,
    schema: Schema,
    mut convert: impl FnMut(&Row, &mut Vec<String>) -> Result<T>,
    key: impl Fn(&T) -> K,
    show_key: impl Fn(&T) -> String,
) -> Result<Table<T>> {
    let rows = open(text, schema)?;
    let mut records = Vec::new();
    let mut warnings = Vec::new();
    let mut seen = HashSet::new();
    for row in rows.rows(schema)? {
        let rec = convert(&row, &mut warnings)?;
        if !seen.insert(key(&rec)) {
            return Err(Error::DuplicateKey {
                line: row.line,
                key: show_key(&rec),
            });
        }
        records.push(rec);
    }
    Ok(Table {
        comments: rows.comments,
        records,
        warnings,
    })
}

pub fn parse_scores(text: &str) -> Result<Table<ScoreRecord>> {
    parse_with(
        text,
        Schema::Scores,
        |row, _| {
            let id = sample_id(row)?;
            let score = real(row, 1, "score")?;
            if score < 0.0 {
                return Err(bad(row.line, "score", &row.fields[1], "negative"));
            }
            Ok(ScoreRecord { sample_id: id, score })
        },
        |r| r.sample_id.clone(),
        |r| r.sample_id.to_string(),
    )
}

pub fn parse_groups(text: &str) -> Result<Table<GroupAssignment>> {
    parse_with(
        text,
        Schema::Groups,
        |row, _| {
            let id = sample_id(row)?;
            let group = row.fields[1]
                .parse::<GroupLabel>()
                .map_err(|e| bad(row.line, "group", &row.fields[1], e))?;
            Ok(GroupAssignment { sample_id: id, group })
        },
        |r| r.sample_id.clone(),
        |r| r.sample_id.to_string(),
    )
}

fn task(row: &Row) -> Result<String> {
    let t = &row.fields[1];
    if t.is_empty() {
        return Err(bad(row.line, "task", t, "empty task name"));
    }
    Ok(t.clone())
}

pub fn parse_predictions(text: &str) -> Result<Table<PredictionRecord>> {
    parse_with(
        text,
        Schema::Predictions,
        |row, _| {
            let id = sample_id(row)?;
            let task = task(row)?;
            let prob = real(row, 2, "prob")?;
            if !(0.0..=1.0).contains(&prob) {
                return Err(bad(row.line, "prob", &row.fields[2], "outside [0, 1]"));
            }
            Ok(PredictionRecord {
                sample_id: id,
                task,
                prob,
            })
        },
        |r| (r.sample_id.clone(), r.task.clone()),
        |r| format!("({}, {})", r.sample_id, r.task),
    )
}

pub fn parse_labels(text: &str) -> Result<Table<LabelRecord>> {
    parse_with(
        text,
        Schema::Labels,
        |row, _| {
            let id = sample_id(row)?;
            let task = task(row)?;
            let positive = match row.fields[2].as_str() {
                "1" => true,
                "0" => false,
                other => return Err(bad(row.line, "label", other, "expected 0 or 1")),
            };
            Ok(LabelRecord {
                sample_id: id,
                task,
                positive,
            })
        },
        |r| (r.sample_id.clone(), r.task.clone()),
        |r| format!("({}, {})", r.sample_id, r.task),
    )
}

pub fn parse_cohort(text: &str) -> Result<Table<CohortRecord>> {
    parse_with(
        text,
        Schema::Cohort,
        |row, warnings| {
            let id = sample_id(row)?;
            let age = if row.fields[1].is_empty() {
                None
            } else {
                let age = real(row, 1, "age")?;
                if !(0.0..=CohortRecord::MAX_AGE).contains(&age) {
                    return Err(bad(row.line, "age", &row.fields[1], "outside [0, 130]"));
                }
                Some(age)
            };
            let (sex, known) = Sex::parse_lenient(&row.fields[2]);
            if !known {
                warnings.push(format!(
                    "line {}: unrecognized sex {:?} counted as Other/Unknown",
                    row.line, row.fields[2]
                ));
            }
            let (race, known) = Race::parse_lenient(&row.fields[3]);
            if !known {
                warnings.push(format!(
                    "line {}: unrecognized race {:?} counted as Other/Unknown",
                    row.line, row.fields[3]
                ));
            }
            Ok(CohortRecord {
                sample_id: id,
                age,
                sex,
                race,
            })
        },
        |r| r.sample_id.clone(),
        |r| r.sample_id.to_string(),
    )
}

fn render(comments: &[String], header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> String {
    let mut out = String::new();
    for c in comments {
        out.push_str("# ");
        out.push_str(c);
        out.push('\n');
    }
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    let body = w.into_inner().expect("in-memory flush");
    out.push_str(std::str::from_utf8(&body).expect("fields are UTF-8"));
    out
}

pub fn format_scores(records: &[ScoreRecord], comments: &[String]) -> String {
    render(
        comments,
        Schema::Scores.columns(),
        records.iter().map(|r| vec![r.sample_id.to_string(), r.score.to_string()]),
    )
}

pub fn format_groups(records: &[GroupAssignment], comments: &[String]) -> String {
    render(
        comments,
        Schema::Groups.columns(),
        records.iter().map(|r| vec![r.sample_id.to_string(), r.group.to_string()]),
    )
}

pub fn format_predictions(records: &[PredictionRecord], comments: &[String]) -> String {
    render(
        comments,
        Schema::Predictions.columns(),
        records
            .iter()
            .map(|r| vec![r.sample_id.to_string(), r.task.clone(), r.prob.to_string()]),
    )
}

pub fn format_labels(records: &[LabelRecord], comments: &[String]) -> String {
    render(
        comments,
        Schema::Labels.columns(),
        records.iter().map(|r| {
            vec![
                r.sample_id.to_string(),
                r.task.clone(),
                if r.positive { "1" } else { "0" }.to_string(),
            ]
        }),
    )
}

pub fn format_cohort(records: &[CohortRecord], comments: &[String]) -> String {
    render(
        comments,
        Schema::Cohort.columns(),
        records.iter().map(|r| {
            vec![
                r.sample_id.to_string(),
                r.age.map(|a| a.to_string()).unwrap_or_default(),
                r.sex.as_str().to_string(),
                r.race.as_str().to_string(),
            ]
        }),
    )
}

/// Writes through a sibling temporary file and a rename, so readers never
/// see a partial file.
pub fn write_text(path: impl AsRef<Path>, text: &str) -> Result<()> {
    let path = path.as_ref();
    let name = path.file_name().ok_or_else(|| Error::io(path, std::io::ErrorKind::InvalidInput.into()))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, text).map_err(|e| Error::io(path, e))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}
