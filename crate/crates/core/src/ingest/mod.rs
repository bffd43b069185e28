//! On-disk artifacts: labeled image tensors, feature matrices, probability
//! matrices, label lists and the MAT Level-5 container the SVHN release uses.
//!
//! Owned binary formats are little-endian throughout:
//!
//! | format     | layout                                                                 |
//! |------------|------------------------------------------------------------------------|
//! | `SGTD0001` | `u32 N, H, W, C, K`, `N·H·W·C` pixel bytes (N,H,W,C order), `N × u32` labels |
//! | `FEATMTX1` | `u32 n, u32 d, u8 dtype` (0 = f32, 1 = f64), row-major payload         |
//! | `PROBMTX1` | same as `FEATMTX1`, rows are class probabilities                       |

mod bytes;
pub mod mat;

use std::fs;
use std::path::Path;

use bytes::{require_payload, Reader};

use crate::embed::FeatureMatrix;
use crate::{Error, Result};

pub use mat::{read_svhn_mat, read_svhn_mat_bytes, write_svhn_mat};

pub const RAW_MAGIC: &[u8; 8] = b"SGTD0001";
pub const FEATURE_MAGIC: &[u8; 8] = b"FEATMTX1";
pub const PROB_MAGIC: &[u8; 8] = b"PROBMTX1";

/// Row sums must land within this distance of 1.
pub const PROB_ROW_TOLERANCE: f64 = 1e-6;

/// Labeled images stored sample-major as `N × H × W × C` bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    pub images: Vec<u8>,
    pub labels: Vec<u32>,
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    pub class_count: u32,
}

impl Dataset {
    pub fn new(
        images: Vec<u8>,
        labels: Vec<u32>,
        height: usize,
        width: usize,
        channels: usize,
        class_count: u32,
    ) -> Result<Self> {
        let ds = Self {
            images,
            labels,
            height,
            width,
            channels,
            class_count,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn validate(&self) -> Result<()> {
        if self.height == 0 || self.width == 0 || self.channels == 0 {
            return Err(Error::Validation(format!(
                "image dims must be positive, got {}x{}x{}",
                self.height, self.width, self.channels
            )));
        }
        if self.class_count == 0 {
            return Err(Error::Validation("class_count must be positive".into()));
        }
        let expected = self.labels.len() * self.sample_len();
        if self.images.len() != expected {
            return Err(Error::Validation(format!(
                "{} pixel bytes for {} samples of {} bytes",
                self.images.len(),
                self.labels.len(),
                self.sample_len()
            )));
        }
        if let Some(&bad) = self.labels.iter().find(|&&l| l >= self.class_count) {
            return Err(Error::LabelOutOfRange {
                label: bad,
                classes: self.class_count,
            });
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Bytes per sample.
    pub fn sample_len(&self) -> usize {
        self.height * self.width * self.channels
    }

    pub fn sample(&self, i: usize) -> &[u8] {
        let s = self.sample_len();
        &self.images[i * s..(i + 1) * s]
    }

    /// Gathers `indices` into a new dataset with the same geometry.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        let mut images = Vec::with_capacity(indices.len() * self.sample_len());
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            images.extend_from_slice(self.sample(i));
            labels.push(self.labels[i]);
        }
        Dataset {
            images,
            labels,
            height: self.height,
            width: self.width,
            channels: self.channels,
            class_count: self.class_count,
        }
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn encode_raw(ds: &Dataset) -> Result<Vec<u8>> {
    ds.validate()?;
    let dim = |v: usize, name: &str| {
        u32::try_from(v).map_err(|_| Error::Validation(format!("{name} = {v} exceeds u32")))
    };
    let mut out = Vec::with_capacity(28 + ds.images.len() + 4 * ds.labels.len());
    out.extend_from_slice(RAW_MAGIC);
    for (v, name) in [
        (ds.len(), "N"),
        (ds.height, "H"),
        (ds.width, "W"),
        (ds.channels, "C"),
    ] {
        out.extend_from_slice(&dim(v, name)?.to_le_bytes());
    }
    out.extend_from_slice(&ds.class_count.to_le_bytes());
    out.extend_from_slice(&ds.images);
    for l in &ds.labels {
        out.extend_from_slice(&l.to_le_bytes());
    }
    Ok(out)
}

pub fn decode_raw(buf: &[u8]) -> Result<Dataset> {
    const WHAT: &str = "raw tensor file";
    let mut r = Reader::new(buf, WHAT);
    r.expect_magic(RAW_MAGIC)?;
    let n = r.u32()? as u64;
    let h = r.u32()? as u64;
    let w = r.u32()? as u64;
    let c = r.u32()? as u64;
    let k = r.u32()?;
    let per = h
        .checked_mul(w)
        .and_then(|x| x.checked_mul(c))
        .and_then(|x| x.checked_add(4))
        .ok_or_else(|| Error::format(WHAT, "dimensions overflow"))?;
    let total = require_payload(&r, WHAT, n, per)?;
    if r.remaining() != total {
        return Err(Error::format(
            WHAT,
            format!(
                "header implies {total} payload bytes, file holds {}",
                r.remaining()
            ),
        ));
    }
    let pixels = r.take(total - 4 * n as usize)?.to_vec();
    let labels = r
        .take(4 * n as usize)?
        .chunks_exact(4)
        .map(|b| u32::from_le_bytes(b.try_into().unwrap()))
        .collect();
    Dataset::new(pixels, labels, h as usize, w as usize, c as usize, k)
}

pub fn write_raw(path: impl AsRef<Path>, ds: &Dataset) -> Result<()> {
    write_file(path.as_ref(), &encode_raw(ds)?)
}

pub fn read_raw(path: impl AsRef<Path>) -> Result<Dataset> {
    decode_raw(&read_file(path.as_ref())?)
}

/// Element type of a matrix payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dtype {
    F32,
    F64,
}

impl Dtype {
    fn code(self) -> u8 {
        match self {
            Dtype::F32 => 0,
            Dtype::F64 => 1,
        }
    }

    fn from_code(code: u8) -> Result<Self> {
        match code {
            0 => Ok(Dtype::F32),
            1 => Ok(Dtype::F64),
            other => Err(Error::UnsupportedFormat(format!("dtype byte {other}"))),
        }
    }

    fn width(self) -> u64 {
        match self {
            Dtype::F32 => 4,
            Dtype::F64 => 8,
        }
    }
}

fn encode_matrix(magic: &[u8; 8], rows: usize, cols: usize, values: &[f64], dtype: Dtype) -> Result<Vec<u8>> {
    let rows = u32::try_from(rows).map_err(|_| Error::Validation("row count exceeds u32".into()))?;
    let cols = u32::try_from(cols).map_err(|_| Error::Validation("column count exceeds u32".into()))?;
    let mut out = Vec::with_capacity(17 + values.len() * dtype.width() as usize);
    out.extend_from_slice(magic);
    out.extend_from_slice(&rows.to_le_bytes());
    out.extend_from_slice(&cols.to_le_bytes());
    out.push(dtype.code());
    match dtype {
        Dtype::F32 => values
            .iter()
            .for_each(|v| out.extend_from_slice(&(*v as f32).to_le_bytes())),
        Dtype::F64 => values.iter().for_each(|v| out.extend_from_slice(&v.to_le_bytes())),
    }
    Ok(out)
}

fn decode_matrix(buf: &[u8], magic: &[u8; 8], what: &'static str) -> Result<(usize, usize, Vec<f64>, Dtype)> {
    let mut r = Reader::new(buf, what);
    r.expect_magic(magic)?;
    let rows = r.u32()? as u64;
    let cols = r.u32()? as u64;
    let dtype = Dtype::from_code(r.u8()?)?;
    let cells = rows
        .checked_mul(cols)
        .ok_or_else(|| Error::format(what, "dimensions overflow"))?;
    let need = require_payload(&r, what, cells, dtype.width())?;
    if r.remaining() != need {
        return Err(Error::format(
            what,
            format!("header implies {need} payload bytes, file holds {}", r.remaining()),
        ));
    }
    let payload = r.take(need)?;
    let values = match dtype {
        Dtype::F32 => payload
            .chunks_exact(4)
            .map(|b| f64::from(f32::from_le_bytes(b.try_into().unwrap())))
            .collect(),
        Dtype::F64 => payload
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
            .collect(),
    };
    Ok((rows as usize, cols as usize, values, dtype))
}

pub fn encode_features(f: &FeatureMatrix, dtype: Dtype) -> Result<Vec<u8>> {
    encode_matrix(FEATURE_MAGIC, f.rows(), f.dim(), f.values(), dtype)
}

/// Decodes a `FEATMTX1` buffer; the result is tagged `"external"`.
pub fn decode_features(buf: &[u8]) -> Result<FeatureMatrix> {
    let (n, d, values, _) = decode_matrix(buf, FEATURE_MAGIC, "feature matrix")?;
    FeatureMatrix::new(n, d, values, "external", 0)
}

pub fn write_features(path: impl AsRef<Path>, f: &FeatureMatrix, dtype: Dtype) -> Result<()> {
    write_file(path.as_ref(), &encode_features(f, dtype)?)
}

pub fn read_features(path: impl AsRef<Path>) -> Result<FeatureMatrix> {
    decode_features(&read_file(path.as_ref())?)
}

/// Per-sample class posteriors, one row per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbMatrix {
    rows: usize,
    classes: usize,
    values: Vec<f64>,
}

impl ProbMatrix {
    /// Validates entries and renormalizes rows whose sums are within
    /// [`PROB_ROW_TOLERANCE`] of one.
    pub fn new(rows: usize, classes: usize, mut values: Vec<f64>) -> Result<Self> {
        if classes == 0 {
            return Err(Error::Validation("probability matrix needs at least one class".into()));
        }
        if values.len() != rows * classes {
            return Err(Error::Validation(format!(
                "{} values for a {rows} x {classes} matrix",
                values.len()
            )));
        }
        for (i, row) in values.chunks_exact_mut(classes).enumerate() {
            if let Some(bad) = row.iter().find(|v| !v.is_finite() || **v < 0.0) {
                return Err(Error::Validation(format!("row {i}: invalid entry {bad}")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > PROB_ROW_TOLERANCE {
                return Err(Error::Validation(format!("row {i} sums to {sum}")));
            }
            row.iter_mut().for_each(|v| *v /= sum);
        }
        Ok(Self {
            rows,
            classes,
            values,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let classes = rows.first().map_or(0, Vec::len);
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != classes) {
            return Err(Error::Validation(format!(
                "ragged rows: row {i} has {} entries, expected {classes}",
                r.len()
            )));
        }
        Self::new(rows.len(), classes, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.classes..(i + 1) * self.classes]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

pub fn encode_probs(p: &ProbMatrix, dtype: Dtype) -> Result<Vec<u8>> {
    encode_matrix(PROB_MAGIC, p.rows, p.classes, &p.values, dtype)
}

/// Parses either the `PROBMTX1` binary layout or CSV text.
///
/// A CSV header is detected by a first record that does not parse as numbers.
pub fn decode_probs(buf: &[u8]) -> Result<ProbMatrix> {
    if buf.starts_with(PROB_MAGIC) {
        let (n, k, values, _) = decode_matrix(buf, PROB_MAGIC, "probability matrix")?;
        return ProbMatrix::new(n, k, values);
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(buf);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::format("probability csv", e.to_string()))?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if i == 0 => continue,
            Err(e) => {
                return Err(Error::format(
                    "probability csv",
                    format!("record {}: {e}", i + 1),
                ))
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::Validation("probability csv holds no rows".into()));
    }
    ProbMatrix::from_rows(&rows)
}

pub fn read_probs(path: impl AsRef<Path>) -> Result<ProbMatrix> {
    decode_probs(&read_file(path.as_ref())?)
}

/// Label list: one non-negative integer per line, blank lines ignored.
pub fn read_labels(path: impl AsRef<Path>) -> Result<Vec<u32>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .enumerate()
        .map(|(i, l)| {
            l.parse::<u32>()
                .map_err(|e| Error::format("label file", format!("line {}: {e}", i + 1)))
        })
        .collect()
}

pub fn write_labels(path: impl AsRef<Path>, labels: &[u32]) -> Result<()> {
    let mut text = String::with_capacity(labels.len() * 3);
    for l in labels {
        text.push_str(&l.to_string());
        text.push('\n');
    }
    write_file(path.as_ref(), text.as_bytes())
}
