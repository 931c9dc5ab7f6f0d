//! A metric value that is either a number or explicitly undefined.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Why a metric could not be computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UndefinedReason {
    EmptyGroup,
    NoPositiveCalls,
    NoPositives,
    NoNegatives,
    NoAgeData,
    DegenerateGroup,
    UnreachableTarget,
    AnchorUndefined,
    SingleRep,
    /// Supplied from an external source that does not report it.
    NotReported,
}

impl fmt::Display for UndefinedReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UndefinedReason::EmptyGroup => "empty group",
            UndefinedReason::NoPositiveCalls => "no positive calls",
            UndefinedReason::NoPositives => "no positives",
            UndefinedReason::NoNegatives => "no negatives",
            UndefinedReason::NoAgeData => "no age data",
            UndefinedReason::DegenerateGroup => "single-class group",
            UndefinedReason::UnreachableTarget => "target prevalence unreachable",
            UndefinedReason::AnchorUndefined => "anchor prevalence undefined",
            UndefinedReason::SingleRep => "single resample",
            UndefinedReason::NotReported => "not reported",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Metric {
    Value(f64),
    Undefined { undefined: UndefinedReason },
}

impl Metric {
    pub fn undefined(reason: UndefinedReason) -> Self {
        Metric::Undefined { undefined: reason }
    }

    /// `num / den`, or undefined with `reason` when `den` is zero.
    pub fn ratio(num: f64, den: f64, reason: UndefinedReason) -> Self {
        if den == 0.0 {
            Metric::undefined(reason)
        } else {
            Metric::Value(num / den)
        }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            Metric::Value(v) => Some(v),
            Metric::Undefined { .. } => None,
        }
    }

    pub fn reason(self) -> Option<UndefinedReason> {
        match self {
            Metric::Value(_) => None,
            Metric::Undefined { undefined } => Some(undefined),
        }
    }

    pub fn is_defined(self) -> bool {
        matches!(self, Metric::Value(_))
    }

    /// Fixed-point rendering; undefined values print as `n/a`.
    pub fn fixed(self, decimals: usize) -> String {
        match self {
            Metric::Value(v) => format!("{v:.decimals$}"),
            Metric::Undefined { .. } => "n/a".to_string(),
        }
    }

    pub fn map(self, f: impl FnOnce(f64) -> f64) -> Self {
        match self {
            Metric::Value(v) => Metric::Value(f(v)),
            u => u,
        }
    }
}

impl From<f64> for Metric {
    fn from(v: f64) -> Self {
        Metric::Value(v)
    }
}

/// Rounds half away from zero to `decimals` places.
pub fn round_to(v: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    (v * scale).round() / scale
}
