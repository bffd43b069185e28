//! Inception Score from per-sample class posteriors.
//!
//! `IS = exp(mean_x KL(p(y|x) ‖ p(y)))` with `p(y)` the row mean of the
//! probability matrix. Natural logarithms throughout; entries are clamped
//! below at [`LOG_CLAMP`] before taking logs so one-hot rows are finite.

use serde::{Deserialize, Serialize};

use crate::ingest::ProbMatrix;
use crate::{Error, Result};

pub const LOG_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsResult {
    pub score: f64,
    pub mean_kl: f64,
    pub marginal: Vec<f64>,
    pub rows: usize,
}

fn score_rows(p: &ProbMatrix, rows: std::ops::Range<usize>) -> IsResult {
    let k = p.classes();
    let n = rows.len();
    let mut marginal = vec![0.0; k];
    for i in rows.clone() {
        for (m, v) in marginal.iter_mut().zip(p.row(i)) {
            *m += v;
        }
    }
    marginal.iter_mut().for_each(|m| *m /= n as f64);
    let log_marginal: Vec<f64> = marginal.iter().map(|m| m.max(LOG_CLAMP).ln()).collect();
    let total_kl: f64 = rows
        .map(|i| {
            p.row(i)
                .iter()
                .zip(&log_marginal)
                .map(|(&q, lm)| q * (q.max(LOG_CLAMP).ln() - lm))
                .sum::<f64>()
        })
        .sum();
    let mean_kl = total_kl / n as f64;
    IsResult {
        score: mean_kl.exp(),
        mean_kl,
        marginal,
        rows: n,
    }
}

/// One score over every row of `p`.
pub fn inception_score(p: &ProbMatrix) -> Result<IsResult> {
    if p.rows() == 0 {
        return Err(Error::Validation("inception score of an empty matrix".into()));
    }
    Ok(score_rows(p, 0..p.rows()))
}

/// Fold-averaged variant: rows are cut into `folds` contiguous blocks of
/// near-equal size, each scored on its own.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldedIs {
    pub mean: f64,
    pub std: f64,
    pub folds: Vec<IsResult>,
}

pub fn inception_score_folds(p: &ProbMatrix, folds: usize) -> Result<FoldedIs> {
    if folds == 0 || folds > p.rows() {
        return Err(Error::InvalidArgument(format!(
            "{folds} folds for {} rows",
            p.rows()
        )));
    }
    let n = p.rows();
    let results: Vec<IsResult> = (0..folds)
        .map(|f| score_rows(p, (f * n / folds)..((f + 1) * n / folds)))
        .collect();
    let mean = results.iter().map(|r| r.score).sum::<f64>() / folds as f64;
    let std = if folds > 1 {
        (results.iter().map(|r| (r.score - mean).powi(2)).sum::<f64>() / (folds - 1) as f64).sqrt()
    } else {
        0.0
    };
    Ok(FoldedIs {
        mean,
        std,
        folds: results,
    })
}
