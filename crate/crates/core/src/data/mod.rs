//! Feature-sequence datasets, their on-disk format, and synthetic tasks.

mod aqaf;
mod synthetic;

use std::collections::HashSet;

pub use aqaf::{decode, encode, load_features, save_features, AQAF_MAGIC, AQAF_VERSION};
pub use synthetic::{generate_synthetic, synthesize, SyntheticSpec, SyntheticSplit, SyntheticTask};

use crate::autodiff::Tensor;
use crate::error::{Error, Result};

/// One video stand-in: `T × D` snippet features, optionally scored.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureSequence {
    pub sample_id: String,
    pub features: Tensor,
    pub score: Option<f64>,
}

impl FeatureSequence {
    pub fn new(sample_id: impl Into<String>, features: Tensor, score: Option<f64>) -> Result<Self> {
        if features.ndim() != 2 {
            return Err(Error::Dimension {
                op: "feature sequence",
                left: features.shape().to_vec(),
                right: vec![],
            });
        }
        Ok(Self {
            sample_id: sample_id.into(),
            features,
            score,
        })
    }

    pub fn seq_len(&self) -> usize {
        self.features.shape()[0]
    }

    pub fn feat_dim(&self) -> usize {
        self.features.shape()[1]
    }

    pub fn is_labeled(&self) -> bool {
        self.score.is_some()
    }
}

/// Samples with unique ids and one shared `T × D` shape. A sample is
/// labeled exactly when it carries a score.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Dataset {
    samples: Vec<FeatureSequence>,
}

impl Dataset {
    pub fn new(samples: Vec<FeatureSequence>) -> Result<Self> {
        let mut seen = HashSet::new();
        for s in &samples {
            if !seen.insert(s.sample_id.as_str()) {
                return Err(Error::contract(format!("duplicate sample id {:?}", s.sample_id)));
            }
            if let Some(score) = s.score {
                if !score.is_finite() {
                    return Err(Error::contract(format!("non-finite score for {:?}", s.sample_id)));
                }
            }
        }
        if let Some(first) = samples.first() {
            let shape = first.features.shape();
            if let Some(bad) = samples.iter().find(|s| s.features.shape() != shape) {
                return Err(Error::Dimension {
                    op: "dataset",
                    left: shape.to_vec(),
                    right: bad.features.shape().to_vec(),
                });
            }
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[FeatureSequence] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<FeatureSequence> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// `(T, D)`, or `None` for an empty dataset.
    pub fn shape(&self) -> Option<(usize, usize)> {
        self.samples.first().map(|s| (s.seq_len(), s.feat_dim()))
    }

    pub fn labeled(&self) -> impl Iterator<Item = &FeatureSequence> {
        self.samples.iter().filter(|s| s.is_labeled())
    }

    pub fn unlabeled(&self) -> impl Iterator<Item = &FeatureSequence> {
        self.samples.iter().filter(|s| !s.is_labeled())
    }

    pub fn labeled_ids(&self) -> Vec<&str> {
        self.labeled().map(|s| s.sample_id.as_str()).collect()
    }

    pub fn unlabeled_ids(&self) -> Vec<&str> {
        self.unlabeled().map(|s| s.sample_id.as_str()).collect()
    }

    /// `(lo, hi)` over labeled scores.
    pub fn score_range(&self) -> Option<(f64, f64)> {
        self.labeled().filter_map(|s| s.score).fold(None, |acc, v| match acc {
            None => Some((v, v)),
            Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
        })
    }

    /// Splits into `(labeled, unlabeled)` datasets.
    pub fn partition(&self) -> (Dataset, Dataset) {
        let (l, u): (Vec<_>, Vec<_>) = self.samples.iter().cloned().partition(|s| s.is_labeled());
        (Dataset { samples: l }, Dataset { samples: u })
    }

    /// Same samples with every score removed.
    pub fn without_labels(&self) -> Dataset {
        Dataset {
            samples: self
                .samples
                .iter()
                .map(|s| FeatureSequence {
                    score: None,
                    ..s.clone()
                })
                .collect(),
        }
    }
}
