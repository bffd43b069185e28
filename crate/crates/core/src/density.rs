//! Gaussian mixture density model and bits-per-dimension evaluation.
//!
//! EM with k-means++ seeding. Each M-step adds `reg·I` to every covariance.
//! The E-step runs over fixed 1024-row chunks whose partial sums are combined
//! in chunk order, so the fitted model does not depend on the thread count.

use std::f64::consts::{LN_2, PI};
use std::path::Path;

use faer::{Mat, Side};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embed::FeatureMatrix;
use crate::prng::Stream;
use crate::{Error, Result};

const CHUNK: usize = 1024;
pub const INIT_DOMAIN: &str = "gmm-init";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum CovarianceKind {
    #[default]
    Full,
    Diagonal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GmmConfig {
    pub components: usize,
    pub seed: u64,
    pub tol: f64,
    pub max_iter: usize,
    /// `None` means `1e-6 ×` the mean per-dimension variance of the data.
    pub reg: Option<f64>,
    pub covariance: CovarianceKind,
}

impl Default for GmmConfig {
    fn default() -> Self {
        Self {
            components: 1,
            seed: 0,
            tol: 1e-6,
            max_iter: 200,
            reg: None,
            covariance: CovarianceKind::Full,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmmModel {
    pub weights: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    /// Row-major `d × d` per component.
    pub covs: Vec<Vec<f64>>,
    /// Mean log-likelihood per sample after each accepted iteration.
    pub fit_trace: Vec<f64>,
    pub dim: usize,
    pub covariance: CovarianceKind,
    pub reg: f64,
    pub seed: u64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BpdResult {
    pub bpd: f64,
    pub mean_nll_nats: f64,
    pub n: usize,
    pub d: usize,
}

/// Per-component constants for fast log-density evaluation.
struct Component {
    log_norm: f64,
    mean: Vec<f64>,
    /// Lower Cholesky factor, row-major.
    chol: Vec<f64>,
}

impl Component {
    fn new(weight: f64, mean: &[f64], cov: &[f64], d: usize) -> Result<Self> {
        let m = Mat::from_fn(d, d, |i, j| cov[i * d + j]);
        let llt = m
            .llt(Side::Lower)
            .map_err(|_| Error::Degenerate("component covariance is not positive definite".into()))?;
        let l = llt.L();
        let chol: Vec<f64> = (0..d * d)
            .map(|k| if k % d <= k / d { l[(k / d, k % d)] } else { 0.0 })
            .collect();
        let log_det: f64 = (0..d).map(|i| 2.0 * chol[i * d + i].ln()).sum();
        Ok(Self {
            log_norm: weight.ln() - 0.5 * (d as f64 * (2.0 * PI).ln() + log_det),
            mean: mean.to_vec(),
            chol,
        })
    }

    /// `ln(w_k) + ln N(x | μ_k, Σ_k)`.
    fn log_weighted_density(&self, x: &[f64], z: &mut [f64]) -> f64 {
        let d = x.len();
        let mut quad = 0.0;
        for i in 0..d {
            let row = &self.chol[i * d..i * d + i];
            let dot: f64 = row.iter().zip(&z[..i]).map(|(a, b)| a * b).sum();
            z[i] = (x[i] - self.mean[i] - dot) / self.chol[i * d + i];
            quad += z[i] * z[i];
        }
        self.log_norm - 0.5 * quad
    }
}

fn components(model: &GmmModel) -> Result<Vec<Component>> {
    model
        .weights
        .iter()
        .zip(&model.means)
        .zip(&model.covs)
        .map(|((&w, m), c)| Component::new(w, m, c, model.dim))
        .collect()
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Per-row log densities and responsibilities (`n × k`, row-major).
fn e_step(comps: &[Component], f: &FeatureMatrix, want_resp: bool) -> (f64, Vec<f64>) {
    let (n, d, k) = (f.rows(), f.dim(), comps.len());
    let parts: Vec<(f64, Vec<f64>)> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let rows = c * CHUNK..((c + 1) * CHUNK).min(n);
            let mut z = vec![0.0; d];
            let mut logs = vec![0.0; k];
            let mut resp = if want_resp { Vec::with_capacity(rows.len() * k) } else { Vec::new() };
            let mut total = 0.0;
            for i in rows {
                let x = f.row(i);
                for (l, comp) in logs.iter_mut().zip(comps) {
                    *l = comp.log_weighted_density(x, &mut z);
                }
                let lse = log_sum_exp(&logs);
                total += lse;
                if want_resp {
                    resp.extend(logs.iter().map(|l| (l - lse).exp()));
                }
            }
            (total, resp)
        })
        .collect();
    let mut total = 0.0;
    let mut resp = Vec::with_capacity(if want_resp { n * k } else { 0 });
    for (t, r) in parts {
        total += t;
        resp.extend(r);
    }
    (total, resp)
}

/// Weighted moments from responsibilities; accumulates per chunk, then in
/// chunk order.
fn m_step(
    f: &FeatureMatrix,
    resp: &[f64],
    k: usize,
    reg: f64,
    kind: CovarianceKind,
) -> (Vec<f64>, Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let (n, d) = (f.rows(), f.dim());
    let chunks = n.div_ceil(CHUNK);
    let first: Vec<(Vec<f64>, Vec<f64>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut nk = vec![0.0; k];
            let mut sums = vec![0.0; k * d];
            for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                let x = f.row(i);
                for j in 0..k {
                    let r = resp[i * k + j];
                    nk[j] += r;
                    for (s, v) in sums[j * d..(j + 1) * d].iter_mut().zip(x) {
                        *s += r * v;
                    }
                }
            }
            (nk, sums)
        })
        .collect();
    let mut nk = vec![0.0; k];
    let mut sums = vec![0.0; k * d];
    for (a, b) in first {
        nk.iter_mut().zip(a).for_each(|(x, y)| *x += y);
        sums.iter_mut().zip(b).for_each(|(x, y)| *x += y);
    }
    let means: Vec<Vec<f64>> = (0..k)
        .map(|j| {
            let denom = nk[j].max(f64::MIN_POSITIVE);
            sums[j * d..(j + 1) * d].iter().map(|s| s / denom).collect()
        })
        .collect();

    let second: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![0.0; k * d * d];
            let mut diff = vec![0.0; d];
            for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                let x = f.row(i);
                for j in 0..k {
                    let r = resp[i * k + j];
                    if r == 0.0 {
                        continue;
                    }
                    for (t, (a, b)) in diff.iter_mut().zip(x.iter().zip(&means[j])) {
                        *t = a - b;
                    }
                    let block = &mut acc[j * d * d..(j + 1) * d * d];
                    match kind {
                        CovarianceKind::Full => {
                            for p in 0..d {
                                let rp = r * diff[p];
                                for q in 0..=p {
                                    block[p * d + q] += rp * diff[q];
                                }
                            }
                        }
                        CovarianceKind::Diagonal => {
                            for p in 0..d {
                                block[p * d + p] += r * diff[p] * diff[p];
                            }
                        }
                    }
                }
            }
            acc
        })
        .collect();
    let mut acc = vec![0.0; k * d * d];
    for part in second {
        acc.iter_mut().zip(part).for_each(|(x, y)| *x += y);
    }
    let covs = (0..k)
        .map(|j| {
            let denom = nk[j].max(f64::MIN_POSITIVE);
            let block = &acc[j * d * d..(j + 1) * d * d];
            let mut cov = vec![0.0; d * d];
            for p in 0..d {
                for q in 0..=p {
                    let v = block[p * d + q] / denom;
                    cov[p * d + q] = v;
                    cov[q * d + p] = v;
                }
                cov[p * d + p] += reg;
            }
            cov
        })
        .collect();
    let weights = nk.iter().map(|v| v / n as f64).collect();
    (weights, means, covs)
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

/// k-means++ seeding: first center uniform, then proportional to squared
/// distance from the nearest chosen center.
fn seed_centers(f: &FeatureMatrix, k: usize, seed: u64) -> Vec<usize> {
    let n = f.rows();
    let mut stream = Stream::new(seed, INIT_DOMAIN);
    let mut centers = vec![stream.below(n as u64) as usize];
    let mut dist: Vec<f64> = (0..n).map(|i| sq_dist(f.row(i), f.row(centers[0]))).collect();
    while centers.len() < k {
        let total: f64 = dist.iter().sum();
        let pick = if total > 0.0 {
            let target = stream.uniform() * total;
            let mut acc = 0.0;
            let mut chosen = n - 1;
            for (i, v) in dist.iter().enumerate() {
                acc += v;
                if acc > target && *v > 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            stream.below(n as u64) as usize
        };
        centers.push(pick);
        for (i, v) in dist.iter_mut().enumerate() {
            *v = v.min(sq_dist(f.row(i), f.row(pick)));
        }
    }
    centers
}

/// Mean over dimensions of the per-dimension (population) variance.
pub fn mean_variance(f: &FeatureMatrix) -> f64 {
    let (n, d) = (f.rows(), f.dim());
    if n == 0 {
        return 0.0;
    }
    let mut mean = vec![0.0; d];
    for i in 0..n {
        mean.iter_mut().zip(f.row(i)).for_each(|(m, v)| *m += v);
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut var = 0.0;
    for i in 0..n {
        var += sq_dist(f.row(i), &mean);
    }
    var / (n * d) as f64
}

pub fn fit_gmm(f: &FeatureMatrix, cfg: &GmmConfig) -> Result<GmmModel> {
    let (n, d, k) = (f.rows(), f.dim(), cfg.components);
    if k == 0 {
        return Err(Error::InvalidArgument("mixture needs at least one component".into()));
    }
    if n < k {
        return Err(Error::InsufficientSamples { needed: k, got: n });
    }
    let reg = match cfg.reg {
        Some(r) if r < 0.0 || !r.is_finite() => {
            return Err(Error::InvalidArgument(format!("regularization {r} must be >= 0")))
        }
        Some(r) => r,
        None => {
            let v = mean_variance(f);
            if v > 0.0 { 1e-6 * v } else { 1e-6 }
        }
    };

    let centers = seed_centers(f, k, cfg.seed);
    let mut resp = vec![0.0; n * k];
    for i in 0..n {
        let nearest = (0..k)
            .min_by(|&a, &b| {
                sq_dist(f.row(i), f.row(centers[a]))
                    .total_cmp(&sq_dist(f.row(i), f.row(centers[b])))
            })
            .unwrap();
        resp[i * k + nearest] = 1.0;
    }

    let build = |(weights, means, covs): (Vec<f64>, Vec<Vec<f64>>, Vec<Vec<f64>>)| GmmModel {
        weights,
        means,
        covs,
        fit_trace: Vec::new(),
        dim: d,
        covariance: cfg.covariance,
        reg,
        seed: cfg.seed,
        iterations: 0,
        converged: false,
    };
    let evaluate = |m: &GmmModel| -> Result<(f64, Vec<f64>)> {
        let (total, r) = e_step(&components(m)?, f, true);
        let ll = total / n as f64;
        if !ll.is_finite() {
            return Err(Error::Degenerate("non-finite log-likelihood".into()));
        }
        Ok((ll, r))
    };

    let mut model = build(m_step(f, &resp, k, reg, cfg.covariance));
    let (mut ll, r) = evaluate(&model)?;
    resp = r;
    let mut trace = vec![ll];
    let mut converged = false;
    for _ in 0..cfg.max_iter {
        let candidate = build(m_step(f, &resp, k, reg, cfg.covariance));
        let (next, r) = evaluate(&candidate)?;
        if next < ll {
            // below the floating-point noise of a converged fit
            converged = true;
            break;
        }
        model = candidate;
        resp = r;
        trace.push(next);
        let gain = next - ll;
        ll = next;
        if gain < cfg.tol {
            converged = true;
            break;
        }
    }
    model.iterations = trace.len() - 1;
    model.fit_trace = trace;
    model.converged = converged;
    Ok(model)
}

/// Mean negative log-likelihood of `f` under `model`, in nats and in bits per
/// dimension.
pub fn bpd(model: &GmmModel, f: &FeatureMatrix) -> Result<BpdResult> {
    if f.dim() != model.dim {
        return Err(Error::DimensionMismatch {
            left: model.dim,
            right: f.dim(),
        });
    }
    if f.rows() == 0 {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    let (total, _) = e_step(&components(model)?, f, false);
    let mean_nll_nats = -total / f.rows() as f64;
    Ok(BpdResult {
        bpd: mean_nll_nats / (f.dim() as f64 * LN_2),
        mean_nll_nats,
        n: f.rows(),
        d: f.dim(),
    })
}

impl GmmModel {
    pub fn validate(&self) -> Result<()> {
        let k = self.weights.len();
        if k == 0 || self.means.len() != k || self.covs.len() != k {
            return Err(Error::Validation("inconsistent component counts".into()));
        }
        if self.means.iter().any(|m| m.len() != self.dim)
            || self.covs.iter().any(|c| c.len() != self.dim * self.dim)
        {
            return Err(Error::Validation("component shapes do not match dim".into()));
        }
        let sum: f64 = self.weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 || self.weights.iter().any(|w| *w < 0.0) {
            return Err(Error::Validation(format!("weights sum to {sum}")));
        }
        components(self).map(|_| ())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, serde_json::to_string(self)?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let model: GmmModel = serde_json::from_str(&text)?;
        model.validate()?;
        Ok(model)
    }
}
