//! Published reference aggregates for the subset-FID protocol (`m = 10,000`,
//! five seeds, ImageNet-pretrained Inception features) and the matching
//! Inception Scores. They can only be reproduced from externally computed
//! Inception features of the real datasets.

use serde::{Deserialize, Serialize};

use crate::audit::AuditReport;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    const fn new(mean: f64, std: f64) -> Self {
        Self { mean, std }
    }

    /// `|value − mean| ≤ k·std`.
    pub fn contains(&self, value: f64, k: f64) -> bool {
        (value - self.mean).abs() <= k * self.std
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRow {
    pub dataset: &'static str,
    pub fid_within: MeanStd,
    pub fid_cross: MeanStd,
    pub is_train: MeanStd,
    pub is_test: MeanStd,
}

pub const SVHN: ReferenceRow = ReferenceRow {
    dataset: "svhn",
    fid_within: MeanStd::new(3.309, 0.029),
    fid_cross: MeanStd::new(16.687, 0.325),
    is_train: MeanStd::new(8.507, 0.114),
    is_test: MeanStd::new(8.142, 0.501),
};

pub const SVHN_REMIX: ReferenceRow = ReferenceRow {
    dataset: "svhn-remix",
    fid_within: MeanStd::new(3.334, 0.018),
    fid_cross: MeanStd::new(3.326, 0.015),
    is_train: MeanStd::new(8.348, 0.568),
    is_test: MeanStd::new(8.269, 0.549),
};

pub const CIFAR10: ReferenceRow = ReferenceRow {
    dataset: "cifar10",
    fid_within: MeanStd::new(5.196, 0.040),
    fid_cross: MeanStd::new(5.206, 0.031),
    is_train: MeanStd::new(7.700, 0.043),
    is_test: MeanStd::new(7.692, 0.023),
};

pub const ROWS: [ReferenceRow; 3] = [SVHN, SVHN_REMIX, CIFAR10];

/// Train/test sizes of the official SVHN cropped-digit split.
pub const SVHN_TRAIN_SIZE: usize = 73_257;
pub const SVHN_TEST_SIZE: usize = 26_032;

pub fn lookup(dataset: &str) -> Option<ReferenceRow> {
    ROWS.iter().copied().find(|r| r.dataset.eq_ignore_ascii_case(dataset))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceCheck {
    pub dataset: &'static str,
    pub within_in_band: bool,
    pub cross_in_band: bool,
    pub sigmas: f64,
}

/// Whether an audit's aggregate means fall inside `mean ± sigmas·std` of the
/// reference row.
pub fn check(report: &AuditReport, row: &ReferenceRow, sigmas: f64) -> ReferenceCheck {
    ReferenceCheck {
        dataset: row.dataset,
        within_in_band: row.fid_within.contains(report.within_mean, sigmas),
        cross_in_band: row.fid_cross.contains(report.cross_mean, sigmas),
        sigmas,
    }
}
