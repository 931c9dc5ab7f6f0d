//! Record-level cohorts whose computed statistics round to the published
//! cells.
//!
//! Within a group, probabilities sit in six blocks ordered
//! `d < y < c < 0.5 <= b < x < a`: false negatives below the true negatives
//! (`d`), true negatives (`y = 1 - neg`), false negatives above them (`c`),
//! true positives below the false positives (`b`), false positives
//! (`x = neg`) and true positives above them (`a`). With `k1` true positives
//! in `a` and `k2` false negatives in `c`,
//!
//! `AUROC * P * N = TP * TN + k1 * FP + k2 * TN`
//!
//! and every negative has confidence `neg`. The four positive blocks share
//! one interpolation parameter that is solved for the positive mean.

use std::collections::{BTreeSet, HashMap};

use asrs_core::{CohortRecord, GroupAssignment, GroupLabel, LabelRecord, PredictionRecord, Race, SampleId, Sex};

use crate::tables::{self, cells, num, SplitLine, GROUP_DEMOGRAPHICS, TASKS};

/// Largest distance from a printed cell that still prints as that cell.
const HALF_ULP3: f64 = 0.0005 - 1e-7;

fn rounds_to(value: f64, printed: f64, decimals: i32) -> bool {
    (value - printed).abs() < 0.5 * 10f64.powi(-decimals) - 1e-9
}

#[derive(Debug, Clone, Copy)]
struct Targets {
    prec: f64,
    rec: f64,
    auc: f64,
    ovr: f64,
    pos: f64,
    neg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupPlan {
    pub n: usize,
    pub positives: usize,
    pub tp: usize,
    pub fp: usize,
    pub k1: usize,
    pub k2: usize,
    /// Confidence of every negative.
    pub neg_conf: f64,
    /// Interpolation parameter of the positive blocks, in (0, 1).
    pub t: f64,
}

impl GroupPlan {
    pub fn fn_(&self) -> usize {
        self.positives - self.tp
    }

    pub fn tn(&self) -> usize {
        self.n - self.positives - self.fp
    }

    /// Probabilities and labels, positives first.
    pub fn records(&self) -> Vec<(f64, bool)> {
        let x = self.neg_conf;
        let hi = x + self.t * (1.0 - x);
        let lo = 0.5 + self.t * (x - 0.5);
        let mut out = Vec::with_capacity(self.n);
        let push = |out: &mut Vec<(f64, bool)>, count: usize, p: f64, y: bool| out.extend(std::iter::repeat_n((p, y), count));
        push(&mut out, self.k1, hi, true);
        push(&mut out, self.tp - self.k1, lo, true);
        push(&mut out, self.k2, 1.0 - lo, true);
        push(&mut out, self.fn_() - self.k2, 1.0 - hi, true);
        push(&mut out, self.fp, x, false);
        push(&mut out, self.tn(), 1.0 - x, false);
        out
    }
}

/// Counts for a positive total that satisfy the threshold metrics and the
/// overall-confidence identity; the AUROC and positive mean are not checked.
fn quick_counts(n: usize, p: usize, c: &Targets) -> Option<(usize, usize, f64)> {
    let (pf, nf) = (p as f64, (n - p) as f64);
    let center = (pf * c.pos + nf * c.neg) / n as f64;
    let gap = c.ovr - center;
    if gap.abs() > 2.0 * 0.0004 {
        return None;
    }
    let shift = gap.clamp(-0.0004, 0.0004);
    let tp = (c.rec * pf).round() as usize;
    if (tp as f64 / pf - c.rec).abs() >= HALF_ULP3 || tp == 0 {
        return None;
    }
    let guess = (tp as f64 / c.prec - tp as f64).round() as i64;
    let fp = (guess - 1..=guess + 1)
        .filter(|&f| f >= 0 && f as usize <= n - p)
        .map(|f| f as usize)
        .find(|&f| (tp as f64 / (tp + f) as f64 - c.prec).abs() < HALF_ULP3)?;
    Some((tp, fp, shift))
}

fn plan_group(n: usize, p: usize, c: &Targets) -> Option<GroupPlan> {
    let (tp, fp, shift) = quick_counts(n, p, c)?;
    let (neg_conf, pos_conf) = (c.neg + shift, c.pos + shift);
    let fn_ = p - tp;
    let tn = n - p - fp;
    let pn = (p * (n - p)) as f64;
    let base = (tp * tn) as f64;
    let (lo, hi) = ((c.auc - HALF_ULP3) * pn - base, (c.auc + HALF_ULP3) * pn - base);
    let mut best: Option<(f64, GroupPlan)> = None;
    for k2 in 0..=fn_ {
        let rest = k2 as f64 * tn as f64;
        let (k1_lo, k1_hi) = if fp > 0 {
            let a = ((lo - rest) / fp as f64).ceil().max(0.0);
            let b = ((hi - rest) / fp as f64).floor().min(tp as f64);
            if a > b {
                continue;
            }
            (a as usize, b as usize)
        } else if lo <= rest && rest <= hi {
            (0, 0)
        } else {
            continue;
        };
        for k1 in [k1_lo, (k1_lo + k1_hi) / 2, k1_hi] {
            let high = (k1 + fn_ - k2) as f64;
            let low = p as f64 - high;
            let a = (high * neg_conf + low * 0.5) / p as f64;
            let b = (high * (1.0 - neg_conf) + low * (neg_conf - 0.5)) / p as f64;
            if b <= 0.0 {
                continue;
            }
            let t = (pos_conf - a) / b;
            if !(0.02..=0.98).contains(&t) {
                continue;
            }
            let score = (t - 0.5).abs();
            if best.as_ref().is_none_or(|(s, _)| score < *s) {
                best = Some((score, GroupPlan { n, positives: p, tp, fp, k1, k2, neg_conf, t }));
            }
        }
    }
    best.map(|(_, plan)| plan)
}

fn targets(task: &str, model: &str) -> [Targets; 4] {
    let m: Vec<f64> = cells(tables::metrics_line(task, model).cells).into_iter().map(num).collect();
    let c: Vec<f64> = cells(tables::confidence_line(task, model).cells).into_iter().map(num).collect();
    std::array::from_fn(|g| {
        let base = 5 * g;
        Targets {
            prec: m[base],
            rec: m[base + 1],
            auc: m[base + 2],
            ovr: c[3 * g],
            pos: c[3 * g + 1],
            neg: c[3 * g + 2],
        }
    })
}

/// Group plans for one task, with positive totals matching the published
/// test prevalence.
pub fn plan_task(task: &str, model: &str) -> Result<[GroupPlan; 4], String> {
    let sizes = GROUP_DEMOGRAPHICS.n;
    let total: usize = sizes.iter().sum();
    let prevalence = num(tables::test_prevalence(task));
    let t = targets(task, model);
    let feasible: Vec<Vec<usize>> = (0..4)
        .map(|g| (1..sizes[g]).filter(|&p| quick_counts(sizes[g], p, &t[g]).is_some()).collect())
        .collect();
    if let Some(g) = feasible.iter().position(Vec::is_empty) {
        return Err(format!("no positive count fits G{} of {task}/{model}", g + 1));
    }
    let totals: Vec<usize> = (0..=total)
        .filter(|&sum| rounds_to(100.0 * sum as f64 / total as f64, prevalence, 1))
        .collect();
    let (&lo, &hi) = (totals.first().ok_or("empty prevalence window")?, totals.last().unwrap());
    // start every group at the same quantile of its feasible counts, chosen
    // so the starting counts add up to the middle of the prevalence window
    let at = |q: usize| -> Vec<usize> { feasible.iter().map(|f| f[q * (f.len() - 1) / 1000]).collect() };
    let goal = (lo + hi) / 2;
    let q = (0..=1000).min_by_key(|&q| at(q).iter().sum::<usize>().abs_diff(goal)).unwrap();
    let start = at(q);
    let candidates: Vec<Vec<usize>> = feasible
        .into_iter()
        .zip(&start)
        .map(|(mut c, &mid)| {
            c.sort_by_key(|&p| (p.abs_diff(mid), p));
            c
        })
        .collect();
    let first: BTreeSet<usize> = candidates[0].iter().copied().collect();
    let mut memo: [HashMap<usize, Option<GroupPlan>>; 4] = Default::default();
    let mut plan = |g: usize, p: usize| *memo[g].entry(p).or_insert_with(|| plan_group(sizes[g], p, &t[g]));
    for &p1 in candidates[1].iter().take(60) {
        let Some(b) = plan(1, p1) else { continue };
        for &p2 in candidates[2].iter().take(60) {
            let Some(c) = plan(2, p2) else { continue };
            for &p3 in candidates[3].iter().take(60) {
                let Some(d) = plan(3, p3) else { continue };
                let rest = p1 + p2 + p3;
                if rest > hi {
                    continue;
                }
                for &p0 in first.range(lo.saturating_sub(rest)..=hi - rest) {
                    if let Some(a) = plan(0, p0) {
                        return Ok([a, b, c, d]);
                    }
                }
            }
        }
    }
    Err(format!("no record-level plan reproduces {task}/{model}"))
}

pub fn sample_id(i: usize) -> SampleId {
    SampleId::new(format!("img-{i:06}")).expect("valid id")
}

/// Group membership used by every model: contiguous id blocks with the
/// published group sizes.
pub fn assignments() -> Vec<GroupAssignment> {
    let mut out = Vec::new();
    for (g, &n) in GROUP_DEMOGRAPHICS.n.iter().enumerate() {
        let start = out.len();
        out.extend((start..start + n).map(|i| GroupAssignment { sample_id: sample_id(i), group: GroupLabel::ALL[g] }));
    }
    out
}

#[derive(Debug, Clone)]
pub struct ModelFixture {
    pub model: &'static str,
    pub assignments: Vec<GroupAssignment>,
    pub predictions: Vec<PredictionRecord>,
    pub labels: Vec<LabelRecord>,
    pub cohort: Vec<CohortRecord>,
    pub plans: Vec<(String, [GroupPlan; 4])>,
}

pub fn model_fixture(model: &'static str) -> Result<ModelFixture, String> {
    let assignments = assignments();
    let mut predictions = Vec::new();
    let mut labels = Vec::new();
    let mut plans = Vec::new();
    for task in TASKS {
        let task_plans = plan_task(task, model)?;
        let mut offset = 0;
        for plan in &task_plans {
            for (i, (prob, positive)) in plan.records().into_iter().enumerate() {
                let id = sample_id(offset + i);
                predictions.push(PredictionRecord::new(id.clone(), task, prob).map_err(|e| e.to_string())?);
                labels.push(LabelRecord { sample_id: id, task: task.to_string(), positive });
            }
            offset += plan.n;
        }
        plans.push((task.to_string(), task_plans));
    }
    Ok(ModelFixture { model, assignments, predictions, labels, cohort: group_cohort()?, plans })
}

/// Counts `c_i` with `100 * c_i / n` printing as `pcts[i]` at `decimals`
/// places, summing to `n`.
pub fn apportion(n: usize, pcts: &[f64], decimals: i32) -> Option<Vec<usize>> {
    let ok = |c: usize, pct: f64| rounds_to(100.0 * c as f64 / n as f64, pct, decimals);
    let mut counts: Vec<usize> = pcts.iter().map(|p| (p * n as f64 / 100.0).round() as usize).collect();
    if counts.iter().zip(pcts).any(|(&c, &p)| !ok(c, p)) {
        return None;
    }
    let mut sum: usize = counts.iter().sum();
    while sum != n {
        let step_up = sum < n;
        let i = (0..counts.len()).find(|&i| {
            let c = if step_up { counts[i] + 1 } else { counts[i].checked_sub(1).unwrap_or(usize::MAX) };
            c != usize::MAX && ok(c, pcts[i])
        })?;
        if step_up {
            counts[i] += 1;
            sum += 1;
        } else {
            counts[i] -= 1;
            sum -= 1;
        }
    }
    Some(counts)
}

/// Integer ages summing to the nearest total for `mean`.
fn integer_ages(n: usize, mean: f64) -> Vec<f64> {
    let total = (mean * n as f64).round() as usize;
    let (q, r) = (total / n, total % n);
    (0..n).map(|i| (q + usize::from(i < r)) as f64).collect()
}

fn person(i: usize, age: f64, female: bool, race: Race) -> Result<CohortRecord, String> {
    let sex = if female { Sex::Female } else { Sex::Male };
    CohortRecord::new(sample_id(i), Some(age), sex, race).map_err(|e| e.to_string())
}

/// Share used for the unprinted Asian category of the group table.
const GROUP_ASIAN_PCT: f64 = 3.9;

/// Cohort rows for the group demographics table, aligned with
/// [`assignments`].
pub fn group_cohort() -> Result<Vec<CohortRecord>, String> {
    let d = &GROUP_DEMOGRAPHICS;
    let mut out = Vec::new();
    for g in 0..4 {
        let n = d.n[g];
        let ages = integer_ages(n, num(d.age[g]));
        let female = (num(d.female[g]) * n as f64 / 100.0).round() as usize;
        let [w, b, h] = [d.white[g], d.black[g], d.hispanic[g]].map(|p| (num(p) * n as f64 / 100.0).round() as usize);
        let a = (GROUP_ASIAN_PCT * n as f64 / 100.0).round() as usize;
        let other = n
            .checked_sub(w + b + h + a)
            .ok_or_else(|| format!("race shares of G{} exceed 100%", g + 1))?;
        let races = [(Race::White, w), (Race::Black, b), (Race::Asian, a), (Race::HispanicLatino, h), (Race::OtherUnknown, other)];
        let race_of = races.iter().flat_map(|&(r, c)| std::iter::repeat_n(r, c));
        let start = out.len();
        for (i, race) in race_of.enumerate() {
            out.push(person(start + i, ages[i], i < female, race)?);
        }
    }
    Ok(out)
}

/// A cohort for one split whose overview prints as the published row.
///
/// Ages take two values symmetric about the mean, scaled so the sample
/// standard deviation is the published one.
pub fn split_cohort(line: &SplitLine) -> Result<Vec<CohortRecord>, String> {
    let n = line.images;
    let (mean, sd) = (num(line.age_mean), num(line.age_sd));
    let spread = if n.is_multiple_of(2) { sd * ((n - 1) as f64 / n as f64).sqrt() } else { sd };
    let age = |i: usize| {
        if !n.is_multiple_of(2) && i == n - 1 {
            mean
        } else if i.is_multiple_of(2) {
            mean + spread
        } else {
            mean - spread
        }
    };
    let female = apportion(n, &[num(line.female), 100.0 - num(line.female)], 1).ok_or("female share")?[0];
    let races = [line.white, line.black, line.asian, line.hispanic, line.other].map(num);
    let counts = apportion(n, &races, 1).ok_or_else(|| format!("race shares of {}", line.split))?;
    let race_of = Race::ALL.iter().zip(&counts).flat_map(|(&r, &c)| std::iter::repeat_n(r, c));
    race_of.enumerate().map(|(i, race)| person(i, age(i), i < female, race)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_order_and_counts() {
        let plan = GroupPlan { n: 20, positives: 8, tp: 5, fp: 3, k1: 2, k2: 1, neg_conf: 0.8, t: 0.5 };
        let recs = plan.records();
        assert_eq!(recs.len(), 20);
        assert_eq!(recs.iter().filter(|r| r.1).count(), 8);
        assert_eq!(recs.iter().filter(|r| r.1 && r.0 >= 0.5).count(), 5);
        assert_eq!(recs.iter().filter(|r| !r.1 && r.0 >= 0.5).count(), 3);
        let mut probs: Vec<f64> = recs.iter().map(|r| r.0).collect();
        probs.dedup();
        // a, b, c, d, x, y
        assert_eq!(probs.len(), 6);
    }

    #[test]
    fn apportion_hits_printed_shares() {
        // shares add to 100.1; ten units come off, at most four per category before its share would print differently
        let c = apportion(10_000, &[66.6, 16.3, 3.0, 5.4, 8.8], 1).unwrap();
        assert_eq!(c, vec![6656, 1626, 298, 540, 880]);
        assert_eq!(c.iter().sum::<usize>(), 10_000);
        // at n = 1000 every unit moves a share by a full printed step
        assert!(apportion(1000, &[66.6, 16.3, 3.0, 5.4, 8.8], 1).is_none());
        assert!(apportion(10, &[33.3, 33.3, 33.3], 1).is_none());
    }

    #[test]
    fn integer_ages_mean() {
        let ages = integer_ages(7, 10.5);
        assert_eq!(ages.iter().sum::<f64>(), 74.0);
    }
}
