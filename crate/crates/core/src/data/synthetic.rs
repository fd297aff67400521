//! Synthetic score-regression tasks over feature sequences.
//!
//! A hidden latent `z ∈ R^k` drives both the score and a short latent
//! trajectory; each snippet's feature vector is a fixed random projection
//! of its trajectory point plus Gaussian noise. The score is a linear
//! function of `z` plus a small interaction term, so it is recoverable
//! from pooled features when the noise is low.

use std::collections::{HashMap, HashSet};

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{Dataset, FeatureSequence};
use crate::autodiff::Tensor;
use crate::error::{Error, Result};
use crate::rng::{stream, Purpose};

const LATENT_DIM: usize = 4;
const INTERACTION: f64 = 0.3;
const DRIFT: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub num_samples: usize,
    pub seq_len: usize,
    pub feat_dim: usize,
    pub label_fraction: f64,
    pub noise_std: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn num_labeled(&self) -> usize {
        (self.num_samples as f64 * self.label_fraction).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_samples == 0 || self.seq_len == 0 || self.feat_dim == 0 {
            return Err(Error::config("num_samples, T and D must be positive"));
        }
        if !(self.label_fraction > 0.0 && self.label_fraction <= 1.0) {
            return Err(Error::config(format!(
                "label_fraction must be in (0, 1], got {}",
                self.label_fraction
            )));
        }
        if !(self.noise_std >= 0.0) {
            return Err(Error::config("noise_std must be non-negative"));
        }
        if self.num_labeled() < 1 {
            return Err(Error::config("label fraction leaves no labeled sample"));
        }
        Ok(())
    }
}

fn normal(rng: &mut impl Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// The hidden scoring function and feature renderer.
#[derive(Clone, Debug)]
pub struct SyntheticTask {
    seq_len: usize,
    feat_dim: usize,
    /// `[k × D]`
    projection: Vec<f64>,
    /// `[k × k]`, direction of the within-sequence latent drift.
    drift: Vec<f64>,
    /// `[T × D]` snippet-position offsets independent of the latent.
    position: Vec<f64>,
    weights: [f64; LATENT_DIM],
}

impl SyntheticTask {
    pub fn new(seq_len: usize, feat_dim: usize, seed: u64) -> Self {
        let mut rng = stream(seed, Purpose::Synthetic, &[u64::MAX]);
        let scale = 1.0 / (LATENT_DIM as f64).sqrt();
        let projection = (0..LATENT_DIM * feat_dim).map(|_| normal(&mut rng) * scale).collect();
        let drift = (0..LATENT_DIM * LATENT_DIM).map(|_| normal(&mut rng) * scale).collect();
        let position = (0..seq_len * feat_dim).map(|_| 0.5 * normal(&mut rng)).collect();
        let mut weights = [0.0; LATENT_DIM];
        weights.iter_mut().for_each(|w| *w = normal(&mut rng));
        let norm = weights.iter().map(|w| w * w).sum::<f64>().sqrt();
        weights.iter_mut().for_each(|w| *w /= norm);
        Self {
            seq_len,
            feat_dim,
            projection,
            drift,
            position,
            weights,
        }
    }

    pub fn latent_dim(&self) -> usize {
        LATENT_DIM
    }

    pub fn sample_latent(&self, rng: &mut impl Rng) -> Vec<f64> {
        (0..LATENT_DIM).map(|_| normal(rng)).collect()
    }

    pub fn score(&self, z: &[f64]) -> f64 {
        let linear: f64 = self.weights.iter().zip(z).map(|(w, v)| w * v).sum();
        linear + INTERACTION * z[0] * z[1]
    }

    pub fn features(&self, z: &[f64], noise_std: f64, rng: &mut impl Rng) -> Tensor {
        let (t_len, d) = (self.seq_len, self.feat_dim);
        let mut pushed = [0.0; LATENT_DIM];
        for (i, p) in pushed.iter_mut().enumerate() {
            *p = (0..LATENT_DIM).map(|j| self.drift[i * LATENT_DIM + j] * z[j]).sum();
        }
        let mut data = Vec::with_capacity(t_len * d);
        for t in 0..t_len {
            let phase = if t_len > 1 {
                t as f64 / (t_len - 1) as f64 - 0.5
            } else {
                0.0
            };
            let h: Vec<f64> = (0..LATENT_DIM).map(|i| z[i] + DRIFT * phase * pushed[i]).collect();
            for col in 0..d {
                let signal: f64 = (0..LATENT_DIM).map(|i| h[i] * self.projection[i * d + col]).sum();
                let noise = if noise_std > 0.0 { noise_std * normal(rng) } else { 0.0 };
                data.push(signal + self.position[t * d + col] + noise);
            }
        }
        Tensor::new(vec![t_len, d], data).expect("synthetic shape")
    }
}

/// Training set plus held-out labeled test set drawn from one task.
#[derive(Clone, Debug)]
pub struct SyntheticSplit {
    pub train: Dataset,
    pub test: Dataset,
    /// Ground truth for every training sample, including unlabeled ones.
    pub truth: HashMap<String, f64>,
}

/// Draws `spec.num_samples` training samples (labeled by `label_fraction`)
/// and `num_test` labeled test samples.
pub fn synthesize(spec: &SyntheticSpec, num_test: usize) -> Result<SyntheticSplit> {
    spec.validate()?;
    let task = SyntheticTask::new(spec.seq_len, spec.feat_dim, spec.seed);
    let mut split_rng = stream(spec.seed, Purpose::Synthetic, &[u64::MAX - 1]);
    let labeled: HashSet<usize> = sample_indices(&mut split_rng, spec.num_samples, spec.num_labeled())
        .into_iter()
        .collect();

    let draw = |index: u64| {
        let mut rng = stream(spec.seed, Purpose::Synthetic, &[index]);
        let z = task.sample_latent(&mut rng);
        let features = task.features(&z, spec.noise_std, &mut rng);
        (task.score(&z), features)
    };

    let mut truth = HashMap::new();
    let mut train = Vec::with_capacity(spec.num_samples);
    for i in 0..spec.num_samples {
        let (score, features) = draw(i as u64);
        let id = format!("train-{i:05}");
        truth.insert(id.clone(), score);
        let label = labeled.contains(&i).then_some(score);
        train.push(FeatureSequence::new(id, features, label)?);
    }
    let mut test = Vec::with_capacity(num_test);
    for i in 0..num_test {
        let (score, features) = draw((spec.num_samples + i) as u64);
        test.push(FeatureSequence::new(format!("test-{i:05}"), features, Some(score))?);
    }
    Ok(SyntheticSplit {
        train: Dataset::new(train)?,
        test: Dataset::new(test)?,
        truth,
    })
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Dataset> {
    Ok(synthesize(spec, 0)?.train)
}
