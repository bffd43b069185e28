//! Synthetic Gaussian-mixture benchmarks with controlled train/test mismatch.
//!
//! Rows are drawn in fixed 2048-row chunks, each from its own PRNG domain, so
//! the output does not depend on how rayon schedules the chunks.

use std::path::Path;
use std::str::FromStr;

use faer::Mat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embed::FeatureMatrix;
use crate::ingest::Dataset;
use crate::prng::Stream;
use crate::stats::{psd_eigen, sqrt_psd};
use crate::{Error, Result};

const CHUNK: usize = 2048;
/// Multiplier applied to the densest component's weight at strength 1.
pub const SKEW_FACTOR: f64 = 4.0;
pub const TRAIN_DOMAIN: &str = "synth-train";
pub const TEST_DOMAIN: &str = "synth-test";
pub const LABEL_DOMAIN: &str = "synth-class-labels";
const WEIGHT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentSpec {
    pub weight: f64,
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub components: Vec<ComponentSpec>,
    pub seed: u64,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MismatchMode {
    DensitySkew,
    SubpopDrop,
    None,
}

impl FromStr for MismatchMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "density_skew" => Ok(Self::DensitySkew),
            "subpop_drop" => Ok(Self::SubpopDrop),
            "none" => Ok(Self::None),
            other => Err(Error::InvalidArgument(format!("unknown mismatch mode `{other}`"))),
        }
    }
}

impl MismatchMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::DensitySkew => "density_skew",
            Self::SubpopDrop => "subpop_drop",
            Self::None => "none",
        }
    }
}

/// Sampling-ready component: mean plus a symmetric factor `R` with `R·R = Σ`.
struct Prepared {
    mean: Vec<f64>,
    factor: Vec<f64>,
    log_det: f64,
}

fn check_weights(weights: &[f64]) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::Validation("mixture has no components".into()));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::Validation("mixture weights must be finite and >= 0".into()));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > WEIGHT_TOL {
        return Err(Error::Validation(format!("mixture weights sum to {sum}, expected 1")));
    }
    Ok(())
}

impl GeneratorSpec {
    pub fn dim(&self) -> usize {
        self.components.first().map_or(0, |c| c.mean.len())
    }

    pub fn weights(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.weight).collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.prepare().map(|_| ())
    }

    fn prepare(&self) -> Result<Vec<Prepared>> {
        check_weights(&self.weights())?;
        let d = self.dim();
        if d == 0 {
            return Err(Error::Validation("component mean is empty".into()));
        }
        self.components
            .iter()
            .map(|c| {
                if c.mean.len() != d || c.cov.len() != d || c.cov.iter().any(|r| r.len() != d) {
                    return Err(Error::DimensionMismatch {
                        left: d,
                        right: c.mean.len(),
                    });
                }
                if c.mean.iter().chain(c.cov.iter().flatten()).any(|v| !v.is_finite()) {
                    return Err(Error::Validation("non-finite component parameter".into()));
                }
                let cov = Mat::from_fn(d, d, |i, j| c.cov[i][j]);
                let r = sqrt_psd(cov.as_ref())?;
                let (values, _) = psd_eigen(cov.as_ref(), false, crate::stats::CLAMP_TOL)?;
                Ok(Prepared {
                    mean: c.mean.clone(),
                    factor: (0..d * d).map(|k| r[(k / d, k % d)]).collect(),
                    log_det: values.iter().map(|v| v.ln()).sum(),
                })
            })
            .collect()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let spec: Self = serde_json::from_str(&text)?;
        spec.validate()?;
        Ok(spec)
    }
}

fn pick(weights: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (k, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return k;
        }
    }
    // rounding slack: last component with positive weight
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)
}

fn sample_mixture(
    comps: &[Prepared],
    weights: &[f64],
    n: usize,
    seed: u64,
    domain: &str,
) -> Result<(FeatureMatrix, Vec<u32>)> {
    let d = comps[0].mean.len();
    let chunks: Vec<(Vec<f64>, Vec<u32>)> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut s = Stream::new(seed, &format!("{domain}-chunk-{c}"));
            let rows = ((c + 1) * CHUNK).min(n) - c * CHUNK;
            let mut values = Vec::with_capacity(rows * d);
            let mut labels = Vec::with_capacity(rows);
            let mut z = vec![0.0; d];
            for _ in 0..rows {
                let k = pick(weights, s.uniform());
                let comp = &comps[k];
                z.iter_mut().for_each(|v| *v = s.gauss());
                for i in 0..d {
                    let row = &comp.factor[i * d..(i + 1) * d];
                    values.push(comp.mean[i] + row.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>());
                }
                labels.push(k as u32);
            }
            (values, labels)
        })
        .collect();
    let mut values = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for (v, l) in chunks {
        values.extend(v);
        labels.extend(l);
    }
    Ok((FeatureMatrix::new(n, d, values, "synth", seed)?, labels))
}

/// `n` i.i.d. draws from the mixture, with their component indices.
pub fn gen_features_labeled(spec: &GeneratorSpec) -> Result<(FeatureMatrix, Vec<u32>)> {
    let comps = spec.prepare()?;
    sample_mixture(&comps, &spec.weights(), spec.n, spec.seed, "synth-features")
}

pub fn gen_features(spec: &GeneratorSpec) -> Result<FeatureMatrix> {
    gen_features_labeled(spec).map(|(f, _)| f)
}

/// Test-split weights for a mismatch mode. Density rank uses
/// `ln w − ½ ln det Σ`; the shared `2π` term does not change the order.
pub fn mismatch_weights(weights: &[f64], log_dets: &[f64], mode: MismatchMode, strength: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&strength) {
        return Err(Error::InvalidArgument(format!("strength {strength} outside [0, 1]")));
    }
    let score = |k: usize| {
        if weights[k] > 0.0 {
            weights[k].ln() - 0.5 * log_dets[k]
        } else {
            f64::NEG_INFINITY
        }
    };
    let order = |a: &usize, b: &usize| score(*a).total_cmp(&score(*b));
    let mut w = weights.to_vec();
    match mode {
        MismatchMode::None => return Ok(w),
        MismatchMode::DensitySkew => {
            let top = (0..w.len()).max_by(order).unwrap();
            w[top] *= 1.0 + strength * SKEW_FACTOR;
        }
        MismatchMode::SubpopDrop => {
            let low = (0..w.len()).filter(|k| weights[*k] > 0.0).min_by(order).unwrap();
            w[low] *= 1.0 - strength;
        }
    }
    let total: f64 = w.iter().sum();
    if total <= 0.0 {
        return Err(Error::Degenerate("mismatch removed all mixture mass".into()));
    }
    w.iter_mut().for_each(|v| *v /= total);
    Ok(w)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitPair {
    pub train: FeatureMatrix,
    pub test: FeatureMatrix,
    /// Component index of each row.
    pub train_labels: Vec<u32>,
    pub test_labels: Vec<u32>,
    pub test_weights: Vec<f64>,
}

/// Train drawn from the spec's weights, test from the mode-adjusted weights.
pub fn inject_mismatch(
    spec: &GeneratorSpec,
    mode: MismatchMode,
    strength: f64,
    (n_train, n_test): (usize, usize),
    seed: u64,
) -> Result<SplitPair> {
    let comps = spec.prepare()?;
    let weights = spec.weights();
    let log_dets: Vec<f64> = comps.iter().map(|c| c.log_det).collect();
    let test_weights = mismatch_weights(&weights, &log_dets, mode, strength)?;
    let (train, train_labels) = sample_mixture(&comps, &weights, n_train, seed, TRAIN_DOMAIN)?;
    let (test, test_labels) = sample_mixture(&comps, &test_weights, n_test, seed, TEST_DOMAIN)?;
    Ok(SplitPair {
        train,
        test,
        train_labels,
        test_labels,
        test_weights,
    })
}

/// Uniform class labels drawn independently of the mixture component, for
/// exercising the remixer on splits whose class labels carry no information
/// about the skew.
pub fn independent_labels(n: usize, classes: u32, seed: u64, domain: &str) -> Vec<u32> {
    let mut s = Stream::new(seed, &format!("{LABEL_DOMAIN}-{domain}"));
    (0..n).map(|_| s.below(classes as u64) as u32).collect()
}

pub fn component_counts(labels: &[u32], k: usize) -> Vec<usize> {
    let mut counts = vec![0; k];
    for &l in labels {
        counts[l as usize] += 1;
    }
    counts
}

/// Three-component fixture in `d` dimensions: a tight core at the origin
/// (weight 0.2, cov 0.3·I) flanked by two unit-covariance lobes at `±3·e₁`.
pub fn preset_three_component(d: usize, n: usize, seed: u64) -> GeneratorSpec {
    let diag = |v: f64| (0..d).map(|i| (0..d).map(|j| if i == j { v } else { 0.0 }).collect()).collect();
    let at = |x: f64| {
        let mut m = vec![0.0; d];
        m[0] = x;
        m
    };
    GeneratorSpec {
        components: vec![
            ComponentSpec { weight: 0.2, mean: at(0.0), cov: diag(0.3) },
            ComponentSpec { weight: 0.4, mean: at(-3.0), cov: diag(1.0) },
            ComponentSpec { weight: 0.4, mean: at(3.0), cov: diag(1.0) },
        ],
        seed,
        n,
    }
}

/// Pixel-space counterpart: each component is a constant-intensity image with
/// i.i.d. Gaussian pixel noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PixelSpec {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    pub weights: Vec<f64>,
    /// Mean intensity per component, in `[0, 255]`.
    pub levels: Vec<f64>,
    /// Pixel noise standard deviation per component.
    pub noise: Vec<f64>,
}

impl PixelSpec {
    pub fn preset() -> Self {
        Self {
            height: 16,
            width: 16,
            channels: 1,
            weights: vec![0.2, 0.4, 0.4],
            levels: vec![128.0, 64.0, 192.0],
            noise: vec![8.0, 40.0, 40.0],
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_weights(&self.weights)?;
        let k = self.weights.len();
        if self.levels.len() != k || self.noise.len() != k {
            return Err(Error::Validation("pixel spec lists differ in length".into()));
        }
        if self.height == 0 || self.width == 0 || self.channels == 0 {
            return Err(Error::Validation("pixel spec has a zero dimension".into()));
        }
        if self.noise.iter().chain(&self.levels).any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Validation("levels and noise must be finite and >= 0".into()));
        }
        Ok(())
    }

    fn log_dets(&self) -> Vec<f64> {
        let dims = (self.height * self.width * self.channels) as f64;
        self.noise.iter().map(|s| 2.0 * dims * s.ln()).collect()
    }

    fn sample(&self, weights: &[f64], n: usize, seed: u64, domain: &str) -> Result<Dataset> {
        let len = self.height * self.width * self.channels;
        let chunks: Vec<(Vec<u8>, Vec<u32>)> = (0..n.div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| {
                let mut s = Stream::new(seed, &format!("{domain}-pixels-{c}"));
                let rows = ((c + 1) * CHUNK).min(n) - c * CHUNK;
                let mut px = Vec::with_capacity(rows * len);
                let mut labels = Vec::with_capacity(rows);
                for _ in 0..rows {
                    let k = pick(weights, s.uniform());
                    for _ in 0..len {
                        let v = self.levels[k] + self.noise[k] * s.gauss();
                        px.push(v.round().clamp(0.0, 255.0) as u8);
                    }
                    labels.push(k as u32);
                }
                (px, labels)
            })
            .collect();
        let mut images = Vec::with_capacity(n * len);
        let mut labels = Vec::with_capacity(n);
        for (p, l) in chunks {
            images.extend(p);
            labels.extend(l);
        }
        Dataset::new(images, labels, self.height, self.width, self.channels, self.weights.len() as u32)
    }
}

/// Pixel-space splits; labels are component indices.
pub fn inject_mismatch_pixels(
    spec: &PixelSpec,
    mode: MismatchMode,
    strength: f64,
    (n_train, n_test): (usize, usize),
    seed: u64,
) -> Result<(Dataset, Dataset)> {
    spec.validate()?;
    let test_weights = mismatch_weights(&spec.weights, &spec.log_dets(), mode, strength)?;
    Ok((
        spec.sample(&spec.weights, n_train, seed, TRAIN_DOMAIN)?,
        spec.sample(&test_weights, n_test, seed, TEST_DOMAIN)?,
    ))
}
