//! Gaussian summaries of feature matrices and the Fréchet distance between
//! them.
//!
//! The distance is
//! `‖μ₁ − μ₂‖² + Tr(Σ₁) + Tr(Σ₂) − 2·Tr((Σ₁Σ₂)^{1/2})`.
//! The trace term is evaluated through the symmetric product
//! `Σ₁^{1/2} Σ₂ Σ₁^{1/2}`, which has the same eigenvalues as `Σ₁Σ₂` but can
//! be handled by a real symmetric eigensolver.

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatRef, Par, Side};

use crate::embed::FeatureMatrix;
use crate::{Error, Result};

/// Relative Frobenius asymmetry accepted by [`sqrt_psd`].
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Eigenvalues below `-NEG_EIGEN_TOL · λ_max` mean the input is not PSD.
pub const NEG_EIGEN_TOL: f64 = 1e-6;
/// Eigenvalues below `CLAMP_TOL · λ_max` are treated as zero.
pub const CLAMP_TOL: f64 = 1e-10;
/// Default diagonal jitter when [`FrechetOptions::jitter`] is enabled.
pub const DEFAULT_JITTER: f64 = 1e-6;

/// Mean and covariance fitted to a set of feature rows.
#[derive(Debug, Clone)]
pub struct GaussianSummary {
    pub mean: Vec<f64>,
    pub cov: Mat<f64>,
    pub sample_count: usize,
}

impl GaussianSummary {
    /// Builds a summary from explicit moments; `cov` is row-major `d × d`.
    pub fn from_parts(mean: Vec<f64>, cov: &[f64], sample_count: usize) -> Result<Self> {
        let d = mean.len();
        if cov.len() != d * d {
            return Err(Error::DimensionMismatch {
                left: d * d,
                right: cov.len(),
            });
        }
        let cov = Mat::from_fn(d, d, |i, j| cov[i * d + j]);
        check_symmetric(cov.as_ref())?;
        Ok(Self {
            mean,
            cov,
            sample_count,
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn cov_row_major(&self) -> Vec<f64> {
        let d = self.dim();
        (0..d * d).map(|k| self.cov[(k / d, k % d)]).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.cov[(i, i)]).sum()
    }
}

pub(crate) fn mat_mul(a: MatRef<'_, f64>, b: MatRef<'_, f64>) -> Mat<f64> {
    let mut out = Mat::zeros(a.nrows(), b.ncols());
    matmul(out.as_mut(), Accum::Replace, a, b, 1.0, Par::Seq);
    out
}

pub(crate) fn symmetrize(m: &mut Mat<f64>) {
    let d = m.nrows();
    for i in 0..d {
        for j in (i + 1)..d {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

pub(crate) fn frobenius(m: MatRef<'_, f64>) -> f64 {
    m.norm_l2()
}

fn check_symmetric(m: MatRef<'_, f64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            left: m.nrows(),
            right: m.ncols(),
        });
    }
    let d = m.nrows();
    let mut asym = 0.0;
    for i in 0..d {
        for j in 0..d {
            asym += (m[(i, j)] - m[(j, i)]).powi(2);
        }
    }
    let asym = asym.sqrt();
    let scale = frobenius(m);
    if asym > SYMMETRY_TOL * scale {
        return Err(Error::Asymmetric(if scale > 0.0 { asym / scale } else { asym }));
    }
    Ok(())
}

/// Column means and the unbiased (`n − 1`) covariance, symmetrized.
pub fn summarize(f: &FeatureMatrix) -> Result<GaussianSummary> {
    let n = f.rows();
    if n < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: n });
    }
    let d = f.dim();
    let mut mean = vec![0.0; d];
    for i in 0..n {
        for (m, v) in mean.iter_mut().zip(f.row(i)) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let centered = Mat::from_fn(n, d, |i, j| f.row(i)[j] - mean[j]);
    let mut cov = Mat::zeros(d, d);
    matmul(
        cov.as_mut(),
        Accum::Replace,
        centered.transpose(),
        centered.as_ref(),
        1.0 / (n - 1) as f64,
        Par::Seq,
    );
    symmetrize(&mut cov);
    Ok(GaussianSummary {
        mean,
        cov,
        sample_count: n,
    })
}

/// Eigen-spectrum of a symmetric PSD matrix after the tolerance checks.
/// Eigenvalues below `floor_rel · λ_max` become zero; a floor of 0 only
/// clears the tolerated negatives. Returns `(eigenvalues, eigenvectors)`.
pub(crate) fn psd_eigen(
    s: MatRef<'_, f64>,
    vectors: bool,
    floor_rel: f64,
) -> Result<(Vec<f64>, Option<Mat<f64>>)> {
    check_symmetric(s)?;
    let mut sym = s.to_owned();
    symmetrize(&mut sym);
    let (mut values, u) = if vectors {
        let evd = sym
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Degenerate(format!("eigendecomposition failed: {e:?}")))?;
        let vals: Vec<f64> = evd.S().column_vector().iter().copied().collect();
        (vals, Some(evd.U().to_owned()))
    } else {
        let vals = sym
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::Degenerate(format!("eigendecomposition failed: {e:?}")))?;
        (vals, None)
    };
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Degenerate("non-finite eigenvalue".into()));
    }
    let scale = max.max(0.0);
    if min < -NEG_EIGEN_TOL * scale || (scale == 0.0 && min < 0.0) {
        return Err(Error::NotPsd { min, max });
    }
    let floor = floor_rel * scale;
    for v in values.iter_mut() {
        if *v < floor || *v < 0.0 {
            *v = 0.0;
        }
    }
    Ok((values, u))
}

/// Principal square root of a symmetric positive semidefinite matrix.
pub fn sqrt_psd(s: MatRef<'_, f64>) -> Result<Mat<f64>> {
    sqrt_psd_floor(s, CLAMP_TOL)
}

fn sqrt_psd_floor(s: MatRef<'_, f64>, floor_rel: f64) -> Result<Mat<f64>> {
    let (values, u) = psd_eigen(s, true, floor_rel)?;
    let u = u.expect("eigenvectors requested");
    let d = values.len();
    let roots: Vec<f64> = values.iter().map(|v| v.sqrt()).collect();
    let scaled = Mat::from_fn(d, d, |i, j| u[(i, j)] * roots[j]);
    let mut r = mat_mul(scaled.as_ref(), u.transpose());
    symmetrize(&mut r);
    Ok(r)
}

/// `Tr(S^{1/2})` for symmetric PSD `S`, from the eigenvalues alone.
pub fn trace_sqrt_psd(s: MatRef<'_, f64>) -> Result<f64> {
    trace_sqrt_floor(s, CLAMP_TOL)
}

fn trace_sqrt_floor(s: MatRef<'_, f64>, floor_rel: f64) -> Result<f64> {
    let (values, _) = psd_eigen(s, false, floor_rel)?;
    Ok(values.iter().map(|v| v.sqrt()).sum())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FrechetOptions {
    /// Adds `ε·I` to both covariances before the square roots.
    pub jitter: Option<f64>,
}

/// Fréchet distance between two Gaussian summaries.
pub fn frechet(g1: &GaussianSummary, g2: &GaussianSummary) -> Result<f64> {
    frechet_with(g1, g2, &FrechetOptions::default())
}

pub fn frechet_with(g1: &GaussianSummary, g2: &GaussianSummary, opts: &FrechetOptions) -> Result<f64> {
    let d = g1.dim();
    if g2.dim() != d {
        return Err(Error::DimensionMismatch {
            left: d,
            right: g2.dim(),
        });
    }
    let mean_term: f64 = g1
        .mean
        .iter()
        .zip(&g2.mean)
        .map(|(a, b)| (a - b).powi(2))
        .sum();
    let jitter = opts.jitter.unwrap_or(0.0);
    let mut c1 = g1.cov.clone();
    let mut c2 = g2.cov.clone();
    for i in 0..d {
        c1[(i, i)] += jitter;
        c2[(i, i)] += jitter;
    }
    let tr1: f64 = (0..d).map(|i| c1[(i, i)]).sum();
    let tr2: f64 = (0..d).map(|i| c2[(i, i)]).sum();
    // Only negative eigenvalues are cleared here: flooring small positive
    // ones at 1e-10·λ_max would bias the trace by up to 1e-5·λ_max.
    let root1 = sqrt_psd_floor(c1.as_ref(), 0.0)?;
    let mut product = mat_mul(mat_mul(root1.as_ref(), c2.as_ref()).as_ref(), root1.as_ref());
    symmetrize(&mut product);
    let cross = trace_sqrt_floor(product.as_ref(), 0.0)?;
    let raw = mean_term + tr1 + tr2 - 2.0 * cross;
    if raw < -1e-6 {
        log::warn!("Fréchet distance {raw:e} clamped to zero");
    }
    Ok(raw.max(0.0))
}
