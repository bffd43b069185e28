//! Stratified remix of a train/test split.
//!
//! Both splits are pooled class by class, each class pool is shuffled with
//! its own keyed stream (`remix-class-<c>`), and the first `n_train(c)`
//! members go to the new train split. Split sizes and per-class counts are
//! preserved exactly. The final order within each new split is shuffled once
//! more (`remix-order-train` / `remix-order-test`) so classes interleave.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::embed::FeatureMatrix;
use crate::ingest::Dataset;
use crate::prng::Stream;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SourceSplit {
    Train,
    Test,
}

impl Serialize for SourceSplit {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u8(match self {
            SourceSplit::Train => 0,
            SourceSplit::Test => 1,
        })
    }
}

impl<'de> Deserialize<'de> for SourceSplit {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match u8::deserialize(d)? {
            0 => Ok(SourceSplit::Train),
            1 => Ok(SourceSplit::Test),
            v => Err(serde::de::Error::custom(format!("split code {v}, expected 0 or 1"))),
        }
    }
}

pub type Source = (SourceSplit, usize);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemixPlan {
    pub seed: u64,
    pub new_train: Vec<Source>,
    pub new_test: Vec<Source>,
    /// Labels seen at planning time, parallel to `new_train`; used to detect
    /// datasets that changed between planning and materialization.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub new_train_labels: Vec<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub new_test_labels: Vec<u32>,
}

/// Builds a remix plan. Labels must be below `class_count`.
pub fn remix(train_labels: &[u32], test_labels: &[u32], class_count: u32, seed: u64) -> Result<RemixPlan> {
    if let Some(&bad) = train_labels
        .iter()
        .chain(test_labels)
        .find(|&&l| l >= class_count)
    {
        return Err(Error::LabelOutOfRange {
            label: bad,
            classes: class_count,
        });
    }
    let k = class_count as usize;
    let mut pools: Vec<Vec<Source>> = vec![Vec::new(); k];
    let mut train_counts = vec![0usize; k];
    for (i, &l) in train_labels.iter().enumerate() {
        pools[l as usize].push((SourceSplit::Train, i));
        train_counts[l as usize] += 1;
    }
    for (i, &l) in test_labels.iter().enumerate() {
        pools[l as usize].push((SourceSplit::Test, i));
    }
    let shuffled: Vec<(Vec<Source>, Vec<Source>)> = pools
        .into_par_iter()
        .enumerate()
        .map(|(c, mut pool)| {
            Stream::new(seed, &format!("remix-class-{c}")).shuffle(&mut pool);
            let test = pool.split_off(train_counts[c]);
            (pool, test)
        })
        .collect();
    let mut new_train: Vec<Source> = Vec::with_capacity(train_labels.len());
    let mut new_test: Vec<Source> = Vec::with_capacity(test_labels.len());
    for (tr, te) in shuffled {
        new_train.extend(tr);
        new_test.extend(te);
    }
    Stream::new(seed, "remix-order-train").shuffle(&mut new_train);
    Stream::new(seed, "remix-order-test").shuffle(&mut new_test);
    let label_of = |&(split, i): &Source| match split {
        SourceSplit::Train => train_labels[i],
        SourceSplit::Test => test_labels[i],
    };
    let new_train_labels = new_train.iter().map(label_of).collect();
    let new_test_labels = new_test.iter().map(label_of).collect();
    Ok(RemixPlan {
        seed,
        new_train,
        new_test,
        new_train_labels,
        new_test_labels,
    })
}

impl RemixPlan {
    /// The plan that keeps both splits as they are.
    pub fn identity(train_n: usize, test_n: usize) -> Self {
        Self {
            seed: 0,
            new_train: (0..train_n).map(|i| (SourceSplit::Train, i)).collect(),
            new_test: (0..test_n).map(|i| (SourceSplit::Test, i)).collect(),
            new_train_labels: Vec::new(),
            new_test_labels: Vec::new(),
        }
    }

    /// Checks that the plan partitions `train_n + test_n` source pairs.
    pub fn check_partition(&self, train_n: usize, test_n: usize) -> Result<()> {
        let mut seen_train = vec![false; train_n];
        let mut seen_test = vec![false; test_n];
        for &(split, i) in self.new_train.iter().chain(&self.new_test) {
            let (seen, name) = match split {
                SourceSplit::Train => (&mut seen_train, "train"),
                SourceSplit::Test => (&mut seen_test, "test"),
            };
            let len = seen.len();
            let slot = seen.get_mut(i).ok_or(Error::IndexOutOfRange {
                split: name,
                index: i,
                len,
            })?;
            if std::mem::replace(slot, true) {
                return Err(Error::Validation(format!("{name}[{i}] assigned twice")));
            }
        }
        if seen_train.iter().chain(&seen_test).any(|s| !s) {
            return Err(Error::Validation("plan does not cover every source sample".into()));
        }
        Ok(())
    }

    pub fn moved_counts(&self) -> (usize, usize) {
        let to_train = self.new_train.iter().filter(|s| s.0 == SourceSplit::Test).count();
        let to_test = self.new_test.iter().filter(|s| s.0 == SourceSplit::Train).count();
        (to_train, to_test)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_json(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}

fn resolve(
    sources: &[Source],
    expected: &[u32],
    train_labels: &[u32],
    test_labels: &[u32],
    new_split: &'static str,
) -> Result<()> {
    for (pos, &(split, i)) in sources.iter().enumerate() {
        let (labels, name) = match split {
            SourceSplit::Train => (train_labels, "train"),
            SourceSplit::Test => (test_labels, "test"),
        };
        let found = *labels.get(i).ok_or(Error::IndexOutOfRange {
            split: name,
            index: i,
            len: labels.len(),
        })?;
        if let Some(&want) = expected.get(pos) {
            if want != found {
                return Err(Error::LabelDrift {
                    split: new_split,
                    index: pos,
                    expected: want,
                    found,
                });
            }
        }
    }
    Ok(())
}

/// Materializes a plan over image datasets.
pub fn apply_plan(plan: &RemixPlan, train: &Dataset, test: &Dataset) -> Result<(Dataset, Dataset)> {
    if (train.height, train.width, train.channels) != (test.height, test.width, test.channels) {
        return Err(Error::Validation(format!(
            "train images are {}x{}x{}, test images {}x{}x{}",
            train.height, train.width, train.channels, test.height, test.width, test.channels
        )));
    }
    resolve(&plan.new_train, &plan.new_train_labels, &train.labels, &test.labels, "new_train")?;
    resolve(&plan.new_test, &plan.new_test_labels, &train.labels, &test.labels, "new_test")?;
    let class_count = train.class_count.max(test.class_count);
    let gather = |sources: &[Source]| {
        let mut images = Vec::with_capacity(sources.len() * train.sample_len());
        let mut labels = Vec::with_capacity(sources.len());
        for &(split, i) in sources {
            let src = match split {
                SourceSplit::Train => train,
                SourceSplit::Test => test,
            };
            images.extend_from_slice(src.sample(i));
            labels.push(src.labels[i]);
        }
        Dataset::new(images, labels, train.height, train.width, train.channels, class_count)
    };
    Ok((gather(&plan.new_train)?, gather(&plan.new_test)?))
}

/// Materializes a plan over feature matrices. Label drift cannot be checked
/// here; pass the labels the plan was built from to [`check_labels`] first
/// when they are available.
pub fn apply_plan_features(
    plan: &RemixPlan,
    train: &FeatureMatrix,
    test: &FeatureMatrix,
) -> Result<(FeatureMatrix, FeatureMatrix)> {
    if train.dim() != test.dim() {
        return Err(Error::DimensionMismatch {
            left: train.dim(),
            right: test.dim(),
        });
    }
    let gather = |sources: &[Source]| -> Result<FeatureMatrix> {
        let mut values = Vec::with_capacity(sources.len() * train.dim());
        for &(split, i) in sources {
            let (src, name) = match split {
                SourceSplit::Train => (train, "train"),
                SourceSplit::Test => (test, "test"),
            };
            if i >= src.rows() {
                return Err(Error::IndexOutOfRange {
                    split: name,
                    index: i,
                    len: src.rows(),
                });
            }
            values.extend_from_slice(src.row(i));
        }
        FeatureMatrix::new(sources.len(), train.dim(), values, train.embedder_id(), train.seed())
    };
    Ok((gather(&plan.new_train)?, gather(&plan.new_test)?))
}

/// Verifies the plan against the labels it should have been built from.
pub fn check_labels(plan: &RemixPlan, train_labels: &[u32], test_labels: &[u32]) -> Result<()> {
    resolve(&plan.new_train, &plan.new_train_labels, train_labels, test_labels, "new_train")?;
    resolve(&plan.new_test, &plan.new_test_labels, train_labels, test_labels, "new_test")
}

pub fn class_counts(labels: impl IntoIterator<Item = u32>, class_count: u32) -> Vec<usize> {
    let mut counts = vec![0; class_count as usize];
    for l in labels {
        counts[l as usize] += 1;
    }
    counts
}
