use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::autodiff::Tensor;
use crate::data::FeatureSequence;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strength {
    /// Random temporal reversal.
    Weak,
    /// Random temporal reversal plus Gaussian feature noise.
    Strong,
}

/// Augmentation parameters shared by both strengths.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AugmentParams {
    pub flip_probability: f64,
    pub noise_std: f64,
}

impl Default for AugmentParams {
    fn default() -> Self {
        Self {
            flip_probability: 0.5,
            noise_std: 0.1,
        }
    }
}

pub fn augment_features(
    features: &Tensor,
    strength: Strength,
    params: AugmentParams,
    rng: &mut impl Rng,
) -> Tensor {
    let flip = rng.random_bool(params.flip_probability);
    let mut out = if flip {
        features.reversed_rows()
    } else {
        features.clone()
    };
    if strength == Strength::Strong && params.noise_std > 0.0 {
        let noise = Normal::new(0.0, params.noise_std).expect("finite std");
        for v in out.data_mut() {
            *v += noise.sample(rng);
        }
    }
    out
}

pub fn augment(
    f: &FeatureSequence,
    strength: Strength,
    params: AugmentParams,
    rng: &mut impl Rng,
) -> FeatureSequence {
    FeatureSequence {
        sample_id: f.sample_id.clone(),
        features: augment_features(&f.features, strength, params, rng),
        score: f.score,
    }
}
