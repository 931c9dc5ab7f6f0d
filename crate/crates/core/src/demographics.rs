//! Cohort composition per stability group, group-to-group deltas, and a
//! whole-cohort overview.
//!
//! Counts are per image. Group percentages use the group's own size as the
//! denominator; grouped samples without a cohort row count as Other/Unknown
//! and are reported. Missing ages are excluded from the mean.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{round_to, Metric, UndefinedReason};
use crate::model::{CohortRecord, GroupAssignment, GroupLabel, Race, SampleId, Sex};

/// Group rows are stored at this many decimals, as printed.
pub const DECIMALS: i32 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemographicsRow {
    pub group: GroupLabel,
    pub n: usize,
    pub age_mean: Metric,
    pub age_missing: usize,
    pub sex_pct: BTreeMap<Sex, Metric>,
    pub race_pct: BTreeMap<Race, Metric>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemographicsSummary {
    pub rows: Vec<DemographicsRow>,
    /// Grouped samples with no cohort record.
    pub missing_cohort: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemographicsDelta {
    pub from: GroupLabel,
    pub to: GroupLabel,
    pub age_mean: Metric,
    pub sex_pct: BTreeMap<Sex, Metric>,
    pub race_pct: BTreeMap<Race, Metric>,
}

#[derive(Default)]
struct Tally {
    n: usize,
    age_sum: f64,
    age_n: usize,
    sex: [usize; 3],
    race: [usize; 5],
}

fn pct(count: usize, n: usize) -> Metric {
    Metric::ratio(100.0 * count as f64, n as f64, UndefinedReason::EmptyGroup).map(|v| round_to(v, DECIMALS))
}

pub fn summarize_groups(assignments: &[GroupAssignment], cohort: &[CohortRecord]) -> DemographicsSummary {
    let by_id: HashMap<&SampleId, &CohortRecord> = cohort.iter().map(|c| (&c.sample_id, c)).collect();
    let mut tallies: [Tally; 4] = Default::default();
    let mut missing_cohort = 0;
    for a in assignments {
        let t = &mut tallies[a.group.index()];
        t.n += 1;
        match by_id.get(&a.sample_id) {
            Some(c) => {
                if let Some(age) = c.age {
                    t.age_sum += age;
                    t.age_n += 1;
                }
                t.sex[Sex::ALL.iter().position(|&s| s == c.sex).unwrap()] += 1;
                t.race[Race::ALL.iter().position(|&r| r == c.race).unwrap()] += 1;
            }
            None => {
                missing_cohort += 1;
                t.sex[2] += 1;
                t.race[4] += 1;
            }
        }
    }
    let rows = GroupLabel::ALL
        .iter()
        .zip(&tallies)
        .map(|(&group, t)| DemographicsRow {
            group,
            n: t.n,
            age_mean: Metric::ratio(t.age_sum, t.age_n as f64, UndefinedReason::NoAgeData)
                .map(|v| round_to(v, DECIMALS)),
            age_missing: t.n - t.age_n,
            sex_pct: Sex::ALL.iter().zip(t.sex).map(|(&s, c)| (s, pct(c, t.n))).collect(),
            race_pct: Race::ALL.iter().zip(t.race).map(|(&r, c)| (r, pct(c, t.n))).collect(),
        })
        .collect();
    DemographicsSummary { rows, missing_cohort }
}

fn diff(a: Metric, b: Metric) -> Metric {
    match (a, b) {
        (Metric::Value(to), Metric::Value(from)) => Metric::Value(round_to(to - from, DECIMALS)),
        (u @ Metric::Undefined { .. }, _) | (_, u @ Metric::Undefined { .. }) => u,
    }
}

/// Componentwise `to - from`.
pub fn delta_row(rows: &[DemographicsRow], from: GroupLabel, to: GroupLabel) -> Result<DemographicsDelta> {
    let find = |g| rows.iter().find(|r| r.group == g).ok_or(Error::MissingGroup(g));
    let (a, b) = (find(from)?, find(to)?);
    Ok(DemographicsDelta {
        from,
        to,
        age_mean: diff(b.age_mean, a.age_mean),
        sex_pct: Sex::ALL
            .iter()
            .map(|s| (*s, diff(b.sex_pct[s], a.sex_pct[s])))
            .collect(),
        race_pct: Race::ALL
            .iter()
            .map(|r| (*r, diff(b.race_pct[r], a.race_pct[r])))
            .collect(),
    })
}

/// Whole-cohort characteristics at full precision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortOverview {
    pub n: usize,
    pub age_mean: Metric,
    /// Sample standard deviation.
    pub age_sd: Metric,
    pub age_missing: usize,
    pub sex_pct: BTreeMap<Sex, Metric>,
    pub race_pct: BTreeMap<Race, Metric>,
}

pub fn summarize_cohort(cohort: &[CohortRecord]) -> CohortOverview {
    let ages: Vec<f64> = cohort.iter().filter_map(|c| c.age).collect();
    let n_age = ages.len() as f64;
    let age_mean = Metric::ratio(ages.iter().sum(), n_age, UndefinedReason::NoAgeData);
    let age_sd = match age_mean {
        Metric::Value(m) if ages.len() >= 2 => {
            Metric::Value((ages.iter().map(|a| (a - m) * (a - m)).sum::<f64>() / (n_age - 1.0)).sqrt())
        }
        _ => Metric::undefined(UndefinedReason::NoAgeData),
    };
    let n = cohort.len();
    let share = |count: usize| Metric::ratio(100.0 * count as f64, n as f64, UndefinedReason::EmptyGroup);
    CohortOverview {
        n,
        age_mean,
        age_sd,
        age_missing: n - ages.len(),
        sex_pct: Sex::ALL
            .iter()
            .map(|&s| (s, share(cohort.iter().filter(|c| c.sex == s).count())))
            .collect(),
        race_pct: Race::ALL
            .iter()
            .map(|&r| (r, share(cohort.iter().filter(|c| c.race == r).count())))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn person(id: &str, age: Option<f64>, sex: Sex, race: Race) -> CohortRecord {
        CohortRecord::new(SampleId::new(id).unwrap(), age, sex, race).unwrap()
    }

    fn assign(pairs: &[(&str, GroupLabel)]) -> Vec<GroupAssignment> {
        pairs
            .iter()
            .map(|(id, g)| GroupAssignment { sample_id: SampleId::new(*id).unwrap(), group: *g })
            .collect()
    }

    #[test]
    fn mean_age_and_shares() {
        use GroupLabel::*;
        let cohort = [
            person("a", Some(40.0), Sex::Female, Race::White),
            person("b", Some(60.0), Sex::Male, Race::Black),
        ];
        let s = summarize_groups(&assign(&[("a", G1), ("b", G1)]), &cohort);
        let g1 = &s.rows[0];
        assert_eq!(g1.n, 2);
        assert_eq!(g1.age_mean, Metric::Value(50.0));
        assert_eq!(g1.sex_pct[&Sex::Female], Metric::Value(50.0));
        assert_eq!(g1.race_pct[&Race::Asian], Metric::Value(0.0));
        assert_eq!(s.rows[1].n, 0);
        assert_eq!(s.rows[1].sex_pct[&Sex::Female].reason(), Some(UndefinedReason::EmptyGroup));
    }

    #[test]
    fn all_ages_missing() {
        let cohort = [person("a", None, Sex::Female, Race::White)];
        let s = summarize_groups(&assign(&[("a", GroupLabel::G2)]), &cohort);
        assert_eq!(s.rows[1].age_mean.reason(), Some(UndefinedReason::NoAgeData));
        assert_eq!(s.rows[1].age_mean.reason().unwrap().to_string(), "no age data");
        assert_eq!(s.rows[1].age_missing, 1);
    }

    #[test]
    fn missing_cohort_rows_are_counted() {
        let cohort = [person("a", Some(30.0), Sex::Male, Race::Asian)];
        let s = summarize_groups(&assign(&[("a", GroupLabel::G3), ("ghost", GroupLabel::G3)]), &cohort);
        assert_eq!(s.missing_cohort, 1);
        let g3 = &s.rows[2];
        assert_eq!(g3.n, 2);
        assert_eq!(g3.race_pct[&Race::OtherUnknown], Metric::Value(50.0));
        assert_eq!(g3.age_mean, Metric::Value(30.0));
    }

    #[test]
    fn deltas_are_hand_subtractions() {
        use GroupLabel::*;
        // G1: ages 70, 60, races W W B, 2 F; G4: ages 50, 40, 45, 41, races B B W H, 1 F
        let cohort = [
            person("a", Some(70.0), Sex::Female, Race::White),
            person("b", Some(60.0), Sex::Female, Race::White),
            person("c", None, Sex::Male, Race::Black),
            person("d", Some(50.0), Sex::Female, Race::Black),
            person("e", Some(40.0), Sex::Male, Race::Black),
            person("f", Some(45.0), Sex::Male, Race::White),
            person("g", Some(41.0), Sex::Male, Race::HispanicLatino),
        ];
        let a = assign(&[("a", G1), ("b", G1), ("c", G1), ("d", G4), ("e", G4), ("f", G4), ("g", G4)]);
        let s = summarize_groups(&a, &cohort);
        let d = delta_row(&s.rows, G1, G4).unwrap();
        // 44 - 65
        assert_eq!(d.age_mean, Metric::Value(-21.0));
        // 25.00 - 66.67
        assert_eq!(d.sex_pct[&Sex::Female], Metric::Value(-41.67));
        // 50.00 - 33.33
        assert_eq!(d.race_pct[&Race::Black], Metric::Value(16.67));
        assert_eq!(d.race_pct[&Race::HispanicLatino], Metric::Value(25.0));

        let back = delta_row(&s.rows, G4, G1).unwrap();
        assert_eq!(back.age_mean, Metric::Value(21.0));
        let same = delta_row(&s.rows, G4, G4).unwrap();
        assert!(same.race_pct.values().all(|m| *m == Metric::Value(0.0)));
    }

    #[test]
    fn missing_group_in_delta() {
        let s = summarize_groups(&[], &[]);
        assert!(matches!(delta_row(&s.rows[..2], GroupLabel::G1, GroupLabel::G4), Err(Error::MissingGroup(GroupLabel::G4))));
    }

    #[test]
    fn overview_matches_hand_values() {
        let cohort = [
            person("a", Some(40.0), Sex::Female, Race::White),
            person("b", Some(60.0), Sex::Male, Race::Black),
            person("c", None, Sex::Female, Race::White),
            person("d", Some(50.0), Sex::Female, Race::Asian),
        ];
        let o = summarize_cohort(&cohort);
        assert_eq!(o.n, 4);
        assert_eq!(o.age_mean, Metric::Value(50.0));
        assert_eq!(o.age_sd, Metric::Value(10.0));
        assert_eq!(o.age_missing, 1);
        assert_eq!(o.sex_pct[&Sex::Female], Metric::Value(75.0));
        assert_eq!(o.race_pct[&Race::White], Metric::Value(50.0));
    }
}
