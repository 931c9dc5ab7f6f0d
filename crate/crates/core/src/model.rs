//! Domain types shared across the pipeline.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Identifier of one image. 1–128 bytes of UTF-8 without control characters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct SampleId(String);

impl SampleId {
    pub const MAX_LEN: usize = 128;

    pub fn new(id: impl Into<String>) -> Result<Self> {
        let id = id.into();
        let reason = if id.is_empty() {
            Some("empty")
        } else if id.len() > Self::MAX_LEN {
            Some("longer than 128 bytes")
        } else if id.chars().any(char::is_control) {
            Some("contains control characters")
        } else {
            None
        };
        match reason {
            Some(reason) => Err(Error::InvalidSampleId { id, reason }),
            None => Ok(SampleId(id)),
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for SampleId {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        SampleId::new(value)
    }
}

impl From<SampleId> for String {
    fn from(id: SampleId) -> Self {
        id.0
    }
}

impl AsRef<str> for SampleId {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SampleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One of the five encoded views of an image, in canonical on-disk order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ViewTag {
    #[serde(rename = "ORIGINAL")]
    Original,
    #[serde(rename = "ROT_N30")]
    RotN30,
    #[serde(rename = "ROT_N15")]
    RotN15,
    #[serde(rename = "ROT_P15")]
    RotP15,
    #[serde(rename = "ROT_P30")]
    RotP30,
}

impl ViewTag {
    pub const ALL: [ViewTag; 5] = [
        ViewTag::Original,
        ViewTag::RotN30,
        ViewTag::RotN15,
        ViewTag::RotP15,
        ViewTag::RotP30,
    ];

    /// The four perturbed views, in canonical order.
    pub const ROTATIONS: [ViewTag; 4] = [
        ViewTag::RotN30,
        ViewTag::RotN15,
        ViewTag::RotP15,
        ViewTag::RotP30,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ViewTag::Original => "ORIGINAL",
            ViewTag::RotN30 => "ROT_N30",
            ViewTag::RotN15 => "ROT_N15",
            ViewTag::RotP15 => "ROT_P15",
            ViewTag::RotP30 => "ROT_P30",
        }
    }

    pub fn angle_degrees(self) -> i32 {
        match self {
            ViewTag::Original => 0,
            ViewTag::RotN30 => -30,
            ViewTag::RotN15 => -15,
            ViewTag::RotP15 => 15,
            ViewTag::RotP30 => 30,
        }
    }
}

impl fmt::Display for ViewTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ViewTag {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        ViewTag::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| format!("unknown view tag {s:?}"))
    }
}

/// The original and four rotated embeddings of one image.
///
/// Vectors are stored in canonical [`ViewTag`] order and always share one
/// positive length; every component is finite.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingRecord {
    sample_id: SampleId,
    views: [Vec<f32>; 5],
}

impl EmbeddingRecord {
    pub fn new(sample_id: SampleId, views: [Vec<f32>; 5]) -> Result<Self> {
        let dim = views[0].len();
        if dim == 0 {
            return Err(Error::InvalidRecord {
                sample: sample_id.to_string(),
                reason: "embedding dimension must be positive".into(),
            });
        }
        for (tag, v) in ViewTag::ALL.iter().zip(&views) {
            if v.len() != dim {
                return Err(Error::InvalidRecord {
                    sample: sample_id.to_string(),
                    reason: format!("view {tag} has length {} but ORIGINAL has {dim}", v.len()),
                });
            }
            if let Some(index) = v.iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFiniteValue {
                    sample: sample_id.to_string(),
                    view: *tag,
                    index,
                });
            }
        }
        Ok(EmbeddingRecord { sample_id, views })
    }

    pub fn sample_id(&self) -> &SampleId {
        &self.sample_id
    }

    pub fn dim(&self) -> usize {
        self.views[0].len()
    }

    pub fn view(&self, tag: ViewTag) -> &[f32] {
        &self.views[tag.index()]
    }

    pub fn views(&self) -> &[Vec<f32>; 5] {
        &self.views
    }

    pub fn into_parts(self) -> (SampleId, [Vec<f32>; 5]) {
        (self.sample_id, self.views)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub sample_id: SampleId,
    pub score: f64,
}

impl ScoreRecord {
    pub fn new(sample_id: SampleId, score: f64) -> Result<Self> {
        if !score.is_finite() {
            return Err(Error::NonFiniteScore(score));
        }
        if score < 0.0 {
            return Err(Error::OutOfRange {
                name: "score",
                value: score,
                range: "[0, inf)",
            });
        }
        Ok(ScoreRecord { sample_id, score })
    }
}

/// Stability group, G1 (most stable) through G4 (least stable).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GroupLabel {
    G1,
    G2,
    G3,
    G4,
}

impl GroupLabel {
    pub const ALL: [GroupLabel; 4] = [GroupLabel::G1, GroupLabel::G2, GroupLabel::G3, GroupLabel::G4];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            GroupLabel::G1 => "G1",
            GroupLabel::G2 => "G2",
            GroupLabel::G3 => "G3",
            GroupLabel::G4 => "G4",
        }
    }
}

impl fmt::Display for GroupLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GroupLabel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        GroupLabel::ALL
            .into_iter()
            .find(|g| g.as_str() == s)
            .ok_or_else(|| format!("expected one of G1, G2, G3, G4, got {s:?}"))
    }
}

/// A sample's stability group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupAssignment {
    pub sample_id: SampleId,
    pub group: GroupLabel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub sample_id: SampleId,
    pub task: String,
    pub prob: f64,
}

impl PredictionRecord {
    pub fn new(sample_id: SampleId, task: impl Into<String>, prob: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&prob) {
            return Err(Error::OutOfRange {
                name: "prob",
                value: prob,
                range: "[0, 1]",
            });
        }
        Ok(PredictionRecord {
            sample_id,
            task: task.into(),
            prob,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelRecord {
    pub sample_id: SampleId,
    pub task: String,
    pub positive: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sex {
    #[serde(rename = "F")]
    Female,
    #[serde(rename = "M")]
    Male,
    #[serde(rename = "U")]
    OtherUnknown,
}

impl Sex {
    pub const ALL: [Sex; 3] = [Sex::Female, Sex::Male, Sex::OtherUnknown];

    pub fn as_str(self) -> &'static str {
        match self {
            Sex::Female => "F",
            Sex::Male => "M",
            Sex::OtherUnknown => "U",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Sex::Female => "Female",
            Sex::Male => "Male",
            Sex::OtherUnknown => "Other/Unknown",
        }
    }

    /// Maps a cohort-table string to a category; the flag is false when the
    /// string was not recognized and fell through to `OtherUnknown`.
    pub fn parse_lenient(s: &str) -> (Sex, bool) {
        match s.trim().to_ascii_lowercase().as_str() {
            "f" | "female" => (Sex::Female, true),
            "m" | "male" => (Sex::Male, true),
            "u" | "o" | "other" | "unknown" | "other/unknown" | "" => (Sex::OtherUnknown, true),
            _ => (Sex::OtherUnknown, false),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Race {
    White,
    Black,
    Asian,
    #[serde(rename = "Hispanic/Latino")]
    HispanicLatino,
    #[serde(rename = "Other/Unknown")]
    OtherUnknown,
}

impl Race {
    pub const ALL: [Race; 5] = [
        Race::White,
        Race::Black,
        Race::Asian,
        Race::HispanicLatino,
        Race::OtherUnknown,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Race::White => "White",
            Race::Black => "Black",
            Race::Asian => "Asian",
            Race::HispanicLatino => "Hispanic/Latino",
            Race::OtherUnknown => "Other/Unknown",
        }
    }

    pub fn parse_lenient(s: &str) -> (Race, bool) {
        match s.trim().to_ascii_lowercase().as_str() {
            "white" => (Race::White, true),
            "black" => (Race::Black, true),
            "asian" => (Race::Asian, true),
            "hispanic/latino" | "hispanic" | "latino" => (Race::HispanicLatino, true),
            "other/unknown" | "other" | "unknown" | "" => (Race::OtherUnknown, true),
            _ => (Race::OtherUnknown, false),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortRecord {
    pub sample_id: SampleId,
    /// Years; `None` when missing.
    pub age: Option<f64>,
    pub sex: Sex,
    pub race: Race,
}

impl CohortRecord {
    pub const MAX_AGE: f64 = 130.0;

    pub fn new(sample_id: SampleId, age: Option<f64>, sex: Sex, race: Race) -> Result<Self> {
        if let Some(age) = age {
            if !(0.0..=Self::MAX_AGE).contains(&age) {
                return Err(Error::OutOfRange {
                    name: "age",
                    value: age,
                    range: "[0, 130]",
                });
            }
        }
        Ok(CohortRecord {
            sample_id,
            age,
            sex,
            race,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_id_rules() {
        assert!(SampleId::new("s1").is_ok());
        assert!(SampleId::new("").is_err());
        assert!(SampleId::new("a\tb").is_err());
        assert!(SampleId::new("x".repeat(128)).is_ok());
        assert!(SampleId::new("x".repeat(129)).is_err());
    }

    #[test]
    fn view_order_is_canonical() {
        let names: Vec<_> = ViewTag::ALL.iter().map(|v| v.as_str()).collect();
        assert_eq!(names, ["ORIGINAL", "ROT_N30", "ROT_N15", "ROT_P15", "ROT_P30"]);
        assert_eq!(ViewTag::ROTATIONS.map(ViewTag::angle_degrees), [-30, -15, 15, 30]);
        assert_eq!("ROT_P15".parse::<ViewTag>(), Ok(ViewTag::RotP15));
    }

    #[test]
    fn groups_are_ordered() {
        assert!(GroupLabel::G1 < GroupLabel::G2 && GroupLabel::G3 < GroupLabel::G4);
        assert_eq!("G3".parse::<GroupLabel>(), Ok(GroupLabel::G3));
        assert!("G5".parse::<GroupLabel>().is_err());
    }

    #[test]
    fn embedding_record_rejects_bad_views() {
        let id = SampleId::new("s").unwrap();
        let ok = [vec![0.0f32; 2], vec![0.0; 2], vec![0.0; 2], vec![0.0; 2], vec![0.0; 2]];
        assert!(EmbeddingRecord::new(id.clone(), ok.clone()).is_ok());

        let mut ragged = ok.clone();
        ragged[3] = vec![0.0; 3];
        assert!(matches!(
            EmbeddingRecord::new(id.clone(), ragged),
            Err(Error::InvalidRecord { .. })
        ));

        let mut nan = ok;
        nan[4][1] = f32::NAN;
        match EmbeddingRecord::new(id, nan) {
            Err(Error::NonFiniteValue { sample, view, index }) => {
                assert_eq!(sample, "s");
                assert_eq!(view, ViewTag::RotP30);
                assert_eq!(index, 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn lenient_category_parsing() {
        assert_eq!(Race::parse_lenient("Hispanic/Latino"), (Race::HispanicLatino, true));
        assert_eq!(Race::parse_lenient("Martian"), (Race::OtherUnknown, false));
        assert_eq!(Sex::parse_lenient("F"), (Sex::Female, true));
        assert_eq!(Sex::parse_lenient("x"), (Sex::OtherUnknown, false));
    }

    #[test]
    fn cohort_age_bounds() {
        let id = SampleId::new("c").unwrap();
        assert!(CohortRecord::new(id.clone(), Some(130.0), Sex::Male, Race::White).is_ok());
        assert!(CohortRecord::new(id.clone(), Some(131.0), Sex::Male, Race::White).is_err());
        assert!(CohortRecord::new(id, None, Sex::Male, Race::White).is_ok());
    }
}
