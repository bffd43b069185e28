//! Subset-FID audit of a train/test split.
//!
//! For every seed, three equally sized subsets are drawn without
//! replacement: two disjoint ones from train (`A`, `B`) and one from test
//! (`T`). The within-train distance `FID(B, A)` estimates the noise floor for
//! two i.i.d. samples of size `m`; the cross distance `FID(B, T)` should sit
//! at the same level when both splits share one distribution. A cross
//! distance well above the within distance, consistently across seeds, is
//! reported as a mismatch.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embed::FeatureMatrix;
use crate::prng::Stream;
use crate::stats::{frechet_with, summarize, FrechetOptions};
use crate::{Error, Result};

pub const TRAIN_DOMAIN: &str = "subset-train";
pub const TEST_DOMAIN: &str = "subset-test";
pub const DEFAULT_SUBSET_SIZE: usize = 10_000;
pub const DEFAULT_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

/// Index subsets for one seed. `train_prime` and `train_double_prime` never
/// share an index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetTriple {
    pub train_prime: Vec<usize>,
    pub train_double_prime: Vec<usize>,
    pub test_prime: Vec<usize>,
    pub m: usize,
    pub seed: u64,
}

pub fn sample_subsets(train_n: usize, test_n: usize, m: usize, seed: u64) -> Result<SubsetTriple> {
    let need = m.checked_mul(2).ok_or_else(|| Error::InvalidArgument("subset size overflows".into()))?;
    if need > train_n {
        return Err(Error::Capacity {
            split: "train",
            needed: need,
            available: train_n,
        });
    }
    if m > test_n {
        return Err(Error::Capacity {
            split: "test",
            needed: m,
            available: test_n,
        });
    }
    let mut train = Stream::new(seed, TRAIN_DOMAIN).sample_without_replacement(train_n, need)?;
    let train_double_prime = train.split_off(m);
    let test_prime = Stream::new(seed, TEST_DOMAIN).sample_without_replacement(test_n, m)?;
    Ok(SubsetTriple {
        train_prime: train,
        train_double_prime,
        test_prime,
        m,
        seed,
    })
}

/// Thresholds turning the aggregated distances into a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecisionRule {
    /// Mismatch needs `gap_ratio` above this.
    pub ratio_high: f64,
    /// Match needs `gap_ratio` below this.
    pub ratio_low: f64,
    pub z_min: f64,
}

impl Default for DecisionRule {
    fn default() -> Self {
        Self {
            ratio_high: 1.5,
            ratio_low: 1.2,
            z_min: 3.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Match,
    Mismatch,
    Inconclusive,
}

impl DecisionRule {
    pub fn decide(&self, gap_ratio: f64, z_gap: f64) -> Verdict {
        if gap_ratio > self.ratio_high && z_gap > self.z_min {
            Verdict::Mismatch
        } else if gap_ratio < self.ratio_low && z_gap < self.z_min {
            Verdict::Match
        } else {
            Verdict::Inconclusive
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditConfig {
    pub m: usize,
    pub seeds: Vec<u64>,
    pub rule: DecisionRule,
    #[serde(default)]
    pub frechet: FrechetOptions,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self {
            m: DEFAULT_SUBSET_SIZE,
            seeds: DEFAULT_SEEDS.to_vec(),
            rule: DecisionRule::default(),
            frechet: FrechetOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeedRow {
    pub seed: u64,
    #[serde(with = "crate::report::float")]
    pub fid_within: f64,
    #[serde(with = "crate::report::float")]
    pub fid_cross: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub per_seed: Vec<SeedRow>,
    #[serde(with = "crate::report::float")]
    pub within_mean: f64,
    #[serde(with = "crate::report::float")]
    pub within_std: f64,
    #[serde(with = "crate::report::float")]
    pub cross_mean: f64,
    #[serde(with = "crate::report::float")]
    pub cross_std: f64,
    #[serde(with = "crate::report::float")]
    pub gap_ratio: f64,
    #[serde(with = "crate::report::float")]
    pub z_gap: f64,
    pub verdict: Verdict,
    pub config: AuditConfig,
}

fn mean_std(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count() as f64;
    let mean = xs.clone().sum::<f64>() / n;
    let var = xs.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// `cross / within`, with `0/0 = 1` and `x/0 = ∞`.
pub fn gap_ratio(within_mean: f64, cross_mean: f64) -> f64 {
    if within_mean > 0.0 {
        cross_mean / within_mean
    } else if cross_mean > 0.0 {
        f64::INFINITY
    } else {
        1.0
    }
}

/// `(cross − within) / √(σ_within² + σ_cross²)`, with `0/0 = 0`.
pub fn z_gap(within_mean: f64, within_std: f64, cross_mean: f64, cross_std: f64) -> f64 {
    let diff = cross_mean - within_mean;
    let denom = (within_std.powi(2) + cross_std.powi(2)).sqrt();
    if denom > 0.0 {
        diff / denom
    } else if diff == 0.0 {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    }
}

impl AuditReport {
    /// Aggregates per-seed rows; needs at least two rows.
    pub fn from_rows(per_seed: Vec<SeedRow>, config: AuditConfig) -> Result<Self> {
        if per_seed.len() < 2 {
            return Err(Error::InsufficientSamples {
                needed: 2,
                got: per_seed.len(),
            });
        }
        let (within_mean, within_std) = mean_std(per_seed.iter().map(|r| r.fid_within));
        let (cross_mean, cross_std) = mean_std(per_seed.iter().map(|r| r.fid_cross));
        let ratio = gap_ratio(within_mean, cross_mean);
        let z = z_gap(within_mean, within_std, cross_mean, cross_std);
        Ok(Self {
            per_seed,
            within_mean,
            within_std,
            cross_mean,
            cross_std,
            gap_ratio: ratio,
            z_gap: z,
            verdict: config.rule.decide(ratio, z),
            config,
        })
    }

    /// Per-seed rows as CSV (`seed,fid_within,fid_cross`).
    pub fn per_seed_csv(&self) -> String {
        let mut out = String::from("seed,fid_within,fid_cross\n");
        for r in &self.per_seed {
            out.push_str(&format!("{},{},{}\n", r.seed, r.fid_within, r.fid_cross));
        }
        out
    }
}

fn audit_seed(train: &FeatureMatrix, test: &FeatureMatrix, cfg: &AuditConfig, seed: u64) -> Result<SeedRow> {
    let triple = sample_subsets(train.rows(), test.rows(), cfg.m, seed)?;
    let a = summarize(&train.select(&triple.train_prime))?;
    let b = summarize(&train.select(&triple.train_double_prime))?;
    let t = summarize(&test.select(&triple.test_prime))?;
    Ok(SeedRow {
        seed,
        fid_within: frechet_with(&b, &a, &cfg.frechet)?,
        fid_cross: frechet_with(&b, &t, &cfg.frechet)?,
    })
}

/// Runs the audit. Seeds are processed in parallel; each seed owns its PRNG
/// streams, so the report is identical to a serial run.
pub fn audit(train: &FeatureMatrix, test: &FeatureMatrix, cfg: &AuditConfig) -> Result<AuditReport> {
    if train.dim() != test.dim() {
        return Err(Error::DimensionMismatch {
            left: train.dim(),
            right: test.dim(),
        });
    }
    if cfg.seeds.len() < 2 {
        return Err(Error::InvalidArgument("audit needs at least two seeds".into()));
    }
    let mut sorted = cfg.seeds.clone();
    sorted.sort_unstable();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::InvalidArgument(format!("duplicate seed {}", w[0])));
    }
    if cfg.m < 2 {
        return Err(Error::InvalidArgument("subset size must be at least 2".into()));
    }
    let rows = cfg
        .seeds
        .par_iter()
        .map(|&seed| audit_seed(train, test, cfg, seed))
        .collect::<Result<Vec<_>>>()?;
    AuditReport::from_rows(rows, cfg.clone())
}
