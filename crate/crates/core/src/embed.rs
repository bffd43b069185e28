//! Feature matrices and the built-in reference embedder.
//!
//! The reference embedder is a fixed, dependency-free stand-in for a
//! pretrained network: per-channel patch means on a coarse grid, a seeded
//! Gaussian random projection, then `tanh`. Real network activations enter
//! through [`load_features`].

use std::path::Path;

use faer::Mat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ingest::{self, Dataset};
use crate::prng::Stream;
use crate::{Error, Result};

pub const PROJECTION_DOMAIN: &str = "embed-projection";

/// `n × d` real matrix, row-major, one row per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    dim: usize,
    values: Vec<f64>,
    embedder_id: String,
    seed: u64,
}

impl FeatureMatrix {
    pub fn new(rows: usize, dim: usize, values: Vec<f64>, embedder_id: impl Into<String>, seed: u64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Validation("feature dimension must be positive".into()));
        }
        if values.len() != rows * dim {
            return Err(Error::Validation(format!(
                "{} values for a {rows} x {dim} feature matrix",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Validation(format!(
                "non-finite feature at row {}, column {}",
                i / dim,
                i % dim
            )));
        }
        Ok(Self {
            rows,
            dim,
            values,
            embedder_id: embedder_id.into(),
            seed,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Validation("ragged feature rows".into()));
        }
        Self::new(rows.len(), dim, rows.concat(), "inline", 0)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn embedder_id(&self) -> &str {
        &self.embedder_id
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn select(&self, indices: &[usize]) -> FeatureMatrix {
        let mut values = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        FeatureMatrix {
            rows: indices.len(),
            dim: self.dim,
            values,
            embedder_id: self.embedder_id.clone(),
            seed: self.seed,
        }
    }

    /// Stacks `other` below `self`.
    pub fn concat(&self, other: &FeatureMatrix) -> Result<FeatureMatrix> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        let mut values = self.values.clone();
        values.extend_from_slice(&other.values);
        Ok(FeatureMatrix {
            rows: self.rows + other.rows,
            dim: self.dim,
            values,
            embedder_id: self.embedder_id.clone(),
            seed: self.seed,
        })
    }

    pub fn to_mat(&self) -> Mat<f64> {
        Mat::from_fn(self.rows, self.dim, |i, j| self.values[i * self.dim + j])
    }

    /// Applies `f` to every row, producing a matrix of the same shape.
    pub fn map_rows(&self, mut f: impl FnMut(&[f64], &mut [f64])) -> FeatureMatrix {
        let mut values = vec![0.0; self.values.len()];
        for (src, dst) in self.values.chunks_exact(self.dim).zip(values.chunks_exact_mut(self.dim)) {
            f(src, dst);
        }
        FeatureMatrix {
            rows: self.rows,
            dim: self.dim,
            values,
            embedder_id: self.embedder_id.clone(),
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbedderConfig {
    pub grid_h: usize,
    pub grid_w: usize,
    pub projection_dim: usize,
    pub seed: u64,
}

impl Default for EmbedderConfig {
    fn default() -> Self {
        Self {
            grid_h: 8,
            grid_w: 8,
            projection_dim: 64,
            seed: 0,
        }
    }
}

impl EmbedderConfig {
    /// Number of pooled inputs feeding the projection for `channels` channels.
    pub fn pooled_inputs(&self, channels: usize) -> usize {
        self.grid_h * self.grid_w * channels
    }

    pub fn validate(&self, channels: usize) -> Result<()> {
        if self.grid_h == 0 || self.grid_w == 0 {
            return Err(Error::InvalidArgument("pooling grid must be positive".into()));
        }
        let inputs = self.pooled_inputs(channels);
        if self.projection_dim == 0 || self.projection_dim > 4 * inputs {
            return Err(Error::InvalidArgument(format!(
                "projection_dim {} must lie in 1..={}",
                self.projection_dim,
                4 * inputs
            )));
        }
        Ok(())
    }

    pub fn id(&self) -> String {
        format!(
            "reference-g{}x{}-d{}",
            self.grid_h, self.grid_w, self.projection_dim
        )
    }
}

/// The `projection_dim × inputs` projection, rows drawn from `N(0, 1/inputs)`.
pub fn projection_matrix(cfg: &EmbedderConfig, inputs: usize) -> Vec<f64> {
    let mut stream = Stream::new(cfg.seed, PROJECTION_DOMAIN);
    let scale = 1.0 / (inputs as f64).sqrt();
    (0..cfg.projection_dim * inputs)
        .map(|_| stream.gauss() * scale)
        .collect()
}

/// Patch means of one `H × W × C` image on a `grid_h × grid_w` grid.
///
/// Image height and width are padded up to the next multiple of the grid by
/// replicating the last row and column; each patch is then
/// `ceil(H / grid_h) × ceil(W / grid_w)` pixels. Output order is
/// `(grid row, grid col, channel)`, pixel values scaled to `[0, 1]`.
pub fn pooled_means(pixels: &[u8], h: usize, w: usize, c: usize, cfg: &EmbedderConfig) -> Vec<f64> {
    let ph = h.div_ceil(cfg.grid_h);
    let pw = w.div_ceil(cfg.grid_w);
    let norm = 1.0 / (255.0 * (ph * pw) as f64);
    let mut out = vec![0.0; cfg.grid_h * cfg.grid_w * c];
    for gy in 0..cfg.grid_h {
        for gx in 0..cfg.grid_w {
            let cell = &mut out[(gy * cfg.grid_w + gx) * c..][..c];
            for dy in 0..ph {
                let y = (gy * ph + dy).min(h - 1);
                for dx in 0..pw {
                    let x = (gx * pw + dx).min(w - 1);
                    let px = &pixels[(y * w + x) * c..][..c];
                    for (acc, &v) in cell.iter_mut().zip(px) {
                        *acc += f64::from(v);
                    }
                }
            }
            cell.iter_mut().for_each(|v| *v *= norm);
        }
    }
    out
}

/// Embeds every image of `data`. Rows are independent, so the result does not
/// depend on how rayon schedules them.
pub fn embed_reference(data: &Dataset, cfg: &EmbedderConfig) -> Result<FeatureMatrix> {
    data.validate()?;
    cfg.validate(data.channels)?;
    let inputs = cfg.pooled_inputs(data.channels);
    let proj = projection_matrix(cfg, inputs);
    let d = cfg.projection_dim;
    let mut values = vec![0.0; data.len() * d];
    values
        .par_chunks_mut(d)
        .enumerate()
        .for_each(|(i, out)| {
            let pooled = pooled_means(data.sample(i), data.height, data.width, data.channels, cfg);
            for (o, prow) in out.iter_mut().zip(proj.chunks_exact(inputs)) {
                let dot: f64 = prow.iter().zip(&pooled).map(|(a, b)| a * b).sum();
                *o = dot.tanh();
            }
        });
    FeatureMatrix::new(data.len(), d, values, cfg.id(), cfg.seed)
}

/// Loads precomputed features (`FEATMTX1`), tagged `"external"`.
pub fn load_features(path: impl AsRef<Path>) -> Result<FeatureMatrix> {
    ingest::read_features(path)
}
