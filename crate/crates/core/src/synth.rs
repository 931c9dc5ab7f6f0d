//! Deterministic synthetic cohorts with a controllable link between
//! embedding instability and diagnostic misses.
//!
//! Each sample draws a latent standard normal `g`; its per-view shift
//! magnitude is `delta = exp(log_mean + log_sd * g)` and every rotated view
//! is `z0 + delta * u` for a fresh random unit vector `u`, so the intended
//! score is exactly `4 * delta` before `f32` rounding and optional noise.
//! The quartile of `g` under the standard normal (its true instability
//! quartile) sets the probability that a positive receives a low predicted
//! probability. Negatives in the top quartile get their probabilities
//! shrunk towards zero, which makes that group the most confident one.
//!
//! Everything is drawn from one ChaCha8 stream in a fixed order, so equal
//! configurations produce byte-identical files.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::embeddings::encode_binary;
use crate::io::tables::{format_cohort, format_labels, format_predictions};
use crate::metadata::{sha256_hex, TOOL_NAME, TOOL_VERSION};
use crate::model::{CohortRecord, EmbeddingRecord, LabelRecord, PredictionRecord, Race, SampleId, Sex};

/// Upper quartile boundary of the standard normal.
const NORMAL_Q75: f64 = 0.674_489_750_196_081_7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstabilityScale {
    pub log_mean: f64,
    pub log_sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_val: usize,
    pub n_test: usize,
    pub dim: usize,
    pub instability: InstabilityScale,
    /// Probability that a positive in each true quartile gets a low probability.
    pub miss_rate_by_quartile: [f64; 4],
    pub prevalence: f64,
    /// Negatives in the top quartile have their probability divided by `1 + inflation`.
    pub confidence_inflation: f64,
    pub false_positive_rate: f64,
    /// Standard deviation of isotropic noise added to rotated views.
    pub view_noise: f64,
    pub tasks: Vec<String>,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 17,
            n_val: 4000,
            n_test: 4000,
            dim: 32,
            instability: InstabilityScale {
                log_mean: 0.5f64.ln(),
                log_sd: 0.5,
            },
            miss_rate_by_quartile: [0.2, 0.25, 0.3, 0.45],
            prevalence: 0.2,
            confidence_inflation: 1.0,
            false_positive_rate: 0.1,
            view_noise: 0.0,
            tasks: vec!["finding".to_string()],
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n_val < 8 || self.n_test < 8 {
            return fail(format!("n_val and n_test must be >= 8 (got {} and {})", self.n_val, self.n_test));
        }
        if self.dim == 0 {
            return fail("dim must be positive".into());
        }
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if !self.miss_rate_by_quartile.iter().all(|&m| unit(m)) {
            return fail(format!("miss rates must lie in [0, 1]: {:?}", self.miss_rate_by_quartile));
        }
        if !unit(self.false_positive_rate) {
            return fail(format!("false_positive_rate {} outside [0, 1]", self.false_positive_rate));
        }
        if !(self.prevalence > 0.0 && self.prevalence < 1.0) {
            return fail(format!("prevalence {} outside (0, 1)", self.prevalence));
        }
        if !(self.confidence_inflation >= 0.0 && self.confidence_inflation.is_finite()) {
            return fail(format!("confidence_inflation {} must be finite and >= 0", self.confidence_inflation));
        }
        if !(self.view_noise >= 0.0 && self.view_noise.is_finite()) {
            return fail(format!("view_noise {} must be finite and >= 0", self.view_noise));
        }
        if !(self.instability.log_mean.is_finite() && self.instability.log_sd >= 0.0 && self.instability.log_sd.is_finite()) {
            return fail("instability log_mean must be finite and log_sd >= 0".into());
        }
        if self.tasks.is_empty() {
            return fail("at least one task is required".into());
        }
        for (i, t) in self.tasks.iter().enumerate() {
            if t.is_empty() || t.chars().any(char::is_control) || self.tasks[..i].contains(t) {
                return fail(format!("invalid or duplicate task name {t:?}"));
            }
        }
        Ok(())
    }
}

/// Everything a generator run produces, before serialization.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthData {
    pub val_embeddings: Vec<EmbeddingRecord>,
    pub test_embeddings: Vec<EmbeddingRecord>,
    /// `4 * delta` per validation sample.
    pub val_intended: Vec<f64>,
    pub test_intended: Vec<f64>,
    /// True instability quartile (0..=3) per test sample.
    pub test_quartile: Vec<usize>,
    pub predictions: Vec<PredictionRecord>,
    pub labels: Vec<LabelRecord>,
    pub cohort: Vec<CohortRecord>,
}

fn quartile_of(g: f64) -> usize {
    if g <= -NORMAL_Q75 {
        0
    } else if g <= 0.0 {
        1
    } else if g <= NORMAL_Q75 {
        2
    } else {
        3
    }
}

struct Generator<'a> {
    cfg: &'a SynthConfig,
    rng: ChaCha8Rng,
}

impl Generator<'_> {
    fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    fn unit_vector(&mut self) -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..self.cfg.dim).map(|_| self.normal()).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-12 {
                return v.into_iter().map(|x| x / norm).collect();
            }
        }
    }

    /// Returns the record, its intended score and its latent draw.
    fn embedding(&mut self, id: SampleId) -> Result<(EmbeddingRecord, f64, f64)> {
        let origin: Vec<f64> = (0..self.cfg.dim).map(|_| self.normal()).collect();
        let g = self.normal();
        let s = &self.cfg.instability;
        let delta = (s.log_mean + s.log_sd * g).exp();
        let mut views: [Vec<f32>; 5] = Default::default();
        views[0] = origin.iter().map(|&x| x as f32).collect();
        for view in views.iter_mut().skip(1) {
            let u = self.unit_vector();
            *view = origin
                .iter()
                .zip(&u)
                .map(|(&o, &d)| {
                    let noise = if self.cfg.view_noise > 0.0 {
                        self.cfg.view_noise * self.normal()
                    } else {
                        0.0
                    };
                    (o + delta * d + noise) as f32
                })
                .collect();
        }
        Ok((EmbeddingRecord::new(id, views)?, 4.0 * delta, g))
    }

    fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.random_range(lo..hi)
    }

    fn probability(&mut self, positive: bool, quartile: usize) -> f64 {
        let cfg = self.cfg;
        let p = if positive {
            if self.rng.random_bool(cfg.miss_rate_by_quartile[quartile]) {
                self.uniform(0.05, 0.45)
            } else {
                self.uniform(0.55, 0.95)
            }
        } else if self.rng.random_bool(cfg.false_positive_rate) {
            self.uniform(0.5, 0.85)
        } else {
            let p = self.uniform(0.05, 0.45);
            if quartile == 3 {
                p / (1.0 + cfg.confidence_inflation)
            } else {
                p
            }
        };
        (p * 1e6).round() / 1e6
    }

    fn cohort(&mut self, id: SampleId, quartile: usize) -> Result<CohortRecord> {
        const AGE_MEAN: [f64; 4] = [65.0, 64.0, 62.0, 54.0];
        const RACE_STABLE: [f64; 5] = [0.67, 0.14, 0.04, 0.05, 0.10];
        const RACE_UNSTABLE: [f64; 5] = [0.61, 0.20, 0.04, 0.09, 0.06];
        let age = if self.rng.random_bool(0.01) {
            None
        } else {
            let a = (AGE_MEAN[quartile] + 15.0 * self.normal()).clamp(18.0, 95.0);
            Some((a * 10.0).round() / 10.0)
        };
        let sex = if self.rng.random_bool(0.46) { Sex::Female } else { Sex::Male };
        let weights = if quartile == 3 { RACE_UNSTABLE } else { RACE_STABLE };
        let mut u: f64 = self.rng.random();
        let mut race = Race::OtherUnknown;
        for (r, w) in Race::ALL.iter().zip(weights) {
            if u < w {
                race = *r;
                break;
            }
            u -= w;
        }
        CohortRecord::new(id, age, sex, race)
    }
}

pub fn generate_data(cfg: &SynthConfig) -> Result<SynthData> {
    cfg.validate()?;
    let mut gen = Generator {
        cfg,
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
    };
    let mut data = SynthData {
        val_embeddings: Vec::with_capacity(cfg.n_val),
        test_embeddings: Vec::with_capacity(cfg.n_test),
        val_intended: Vec::with_capacity(cfg.n_val),
        test_intended: Vec::with_capacity(cfg.n_test),
        test_quartile: Vec::with_capacity(cfg.n_test),
        predictions: Vec::with_capacity(cfg.n_test * cfg.tasks.len()),
        labels: Vec::with_capacity(cfg.n_test * cfg.tasks.len()),
        cohort: Vec::with_capacity(cfg.n_test),
    };
    for i in 0..cfg.n_val {
        let (rec, intended, _) = gen.embedding(SampleId::new(format!("val-{i:06}"))?)?;
        data.val_embeddings.push(rec);
        data.val_intended.push(intended);
    }
    for i in 0..cfg.n_test {
        let id = SampleId::new(format!("test-{i:06}"))?;
        let (rec, intended, g) = gen.embedding(id.clone())?;
        let q = quartile_of(g);
        data.test_embeddings.push(rec);
        data.test_intended.push(intended);
        data.test_quartile.push(q);
        data.cohort.push(gen.cohort(id.clone(), q)?);
        for task in &cfg.tasks {
            let positive = gen.rng.random_bool(cfg.prevalence);
            let prob = gen.probability(positive, q);
            data.labels.push(LabelRecord {
                sample_id: id.clone(),
                task: task.clone(),
                positive,
            });
            data.predictions.push(PredictionRecord::new(id.clone(), task.clone(), prob)?);
        }
    }
    Ok(data)
}

pub const VAL_EMBEDDINGS: &str = "val_embeddings.asrs";
pub const TEST_EMBEDDINGS: &str = "test_embeddings.asrs";
pub const PREDICTIONS: &str = "predictions.csv";
pub const LABELS: &str = "labels.csv";
pub const COHORT: &str = "cohort.csv";
pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestFile {
    pub name: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthManifest {
    pub tool: String,
    pub version: String,
    pub config: SynthConfig,
    pub files: Vec<ManifestFile>,
}

impl SynthManifest {
    pub fn path_of(&self, dir: &Path, name: &str) -> Option<PathBuf> {
        self.files.iter().any(|f| f.name == name).then(|| dir.join(name))
    }
}

/// Generates a cohort and writes it, plus `manifest.json`, into `out_dir`.
pub fn generate(cfg: &SynthConfig, out_dir: impl AsRef<Path>) -> Result<SynthManifest> {
    let out_dir = out_dir.as_ref();
    let data = generate_data(cfg)?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let outputs: [(&str, Vec<u8>); 5] = [
        (VAL_EMBEDDINGS, encode_binary(&data.val_embeddings)?),
        (TEST_EMBEDDINGS, encode_binary(&data.test_embeddings)?),
        (PREDICTIONS, format_predictions(&data.predictions, &[]).into_bytes()),
        (LABELS, format_labels(&data.labels, &[]).into_bytes()),
        (COHORT, format_cohort(&data.cohort, &[]).into_bytes()),
    ];
    let mut files = Vec::with_capacity(outputs.len());
    for (name, bytes) in outputs {
        let path = out_dir.join(name);
        std::fs::write(&path, &bytes).map_err(|e| Error::io(&path, e))?;
        files.push(ManifestFile {
            name: name.to_string(),
            bytes: bytes.len(),
            sha256: sha256_hex(&bytes),
        });
    }
    let manifest = SynthManifest {
        tool: TOOL_NAME.to_string(),
        version: TOOL_VERSION.to_string(),
        config: cfg.clone(),
        files,
    };
    let path = out_dir.join(MANIFEST);
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}
