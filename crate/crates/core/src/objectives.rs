//! Gaussian regression losses and the unsupervised-weight warm-up.
//!
//! Every loss is the Gaussian negative log-likelihood with the additive
//! `½·ln 2π` dropped: `ln σ + (target − μ)² / (2σ²)`. Each is available as
//! a plain function on [`ScorePrediction`]s and as a tape builder on
//! [`HeadOutput`]s.

use serde::{Deserialize, Serialize};

use crate::autodiff::{Graph, Var};
use crate::error::{Error, Result};
use crate::networks::{HeadOutput, ScorePrediction};

pub fn gaussian_nll(target: f64, pred: ScorePrediction) -> Result<f64> {
    if !(pred.sigma > 0.0) {
        return Err(Error::contract(format!("sigma must be positive, got {}", pred.sigma)));
    }
    let r = target - pred.mu;
    Ok(pred.sigma.ln() + r * r / (2.0 * pred.sigma * pred.sigma))
}

/// `(l_reg_s, l_reg_r)`: absolute-score loss and relative-score loss, the
/// latter against `|s − s_l|`.
pub fn supervised_loss(
    score_pred: ScorePrediction,
    reference_pred: ScorePrediction,
    s: f64,
    s_l: f64,
) -> Result<(f64, f64)> {
    Ok((
        gaussian_nll(s, score_pred)?,
        gaussian_nll(relative_target(s, s_l), reference_pred)?,
    ))
}

pub fn unsupervised_loss(student_pred: ScorePrediction, pseudo_label: f64) -> Result<f64> {
    if !pseudo_label.is_finite() {
        return Err(Error::contract("pseudo-label must be finite"));
    }
    gaussian_nll(pseudo_label, student_pred)
}

/// Regression target for the reference network on a labeled pair.
pub fn relative_target(s: f64, s_l: f64) -> f64 {
    (s - s_l).abs()
}

/// Gaussian NLL of `target` under a head's `(mu, sigma)`, on the tape.
pub fn gaussian_nll_on_tape(g: &mut Graph, target: f64, head: &HeadOutput) -> Result<Var> {
    let t = g.scalar(target);
    let resid = g.sub(t, head.mu)?;
    let sq = g.mul(resid, resid)?;
    let var = g.mul(head.sigma, head.sigma)?;
    let denom = g.scale(var, 2.0);
    let quad = g.div(sq, denom)?;
    let log_sigma = g.log(head.sigma)?;
    g.add(log_sigma, quad)
}

/// Exponential warm-up `peak · exp(−sharpness · (1 − t/horizon)²)`,
/// held at `peak` past the horizon.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaSchedule {
    pub peak: f64,
    pub sharpness: f64,
    pub horizon: f64,
}

impl Default for BetaSchedule {
    fn default() -> Self {
        Self {
            peak: 0.2,
            sharpness: 5.0,
            horizon: 200.0,
        }
    }
}

impl BetaSchedule {
    pub fn at(&self, epoch: f64) -> Result<f64> {
        if !(epoch >= 0.0) {
            return Err(Error::contract(format!("epoch must be non-negative, got {epoch}")));
        }
        let gap = (1.0 - epoch / self.horizon).max(0.0);
        Ok(self.peak * (-self.sharpness * gap * gap).exp())
    }
}

/// Unsupervised weight at `epoch` under the default schedule.
pub fn beta_at(epoch: f64) -> Result<f64> {
    BetaSchedule::default().at(epoch)
}

/// Per-step (or per-epoch averaged) loss components.
///
/// `l_reg_s` is the absolute-score loss of whichever network is trained
/// on labels in the current stage (teacher during burn-in, student after).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub l_reg_s: f64,
    pub l_reg_r: Option<f64>,
    pub l_unsup: Option<f64>,
    pub beta: f64,
    pub total: f64,
}

impl LossBreakdown {
    pub fn new(l_reg_s: f64, l_reg_r: Option<f64>, l_unsup: Option<f64>, beta: f64) -> Self {
        let mut out = Self {
            l_reg_s,
            l_reg_r,
            l_unsup,
            beta,
            total: 0.0,
        };
        out.total = out.recompute_total();
        out
    }

    /// `l_reg_s + l_reg_r + beta · l_unsup`, absent terms counting as zero.
    pub fn recompute_total(&self) -> f64 {
        self.l_reg_s + self.l_reg_r.unwrap_or(0.0) + self.beta * self.l_unsup.unwrap_or(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::Tensor;
    use proptest::prelude::*;

    fn pred(mu: f64, sigma: f64) -> ScorePrediction {
        ScorePrediction::new(mu, sigma).unwrap()
    }

    #[test]
    fn nll_examples() {
        assert_eq!(gaussian_nll(1.5, pred(1.5, 1.0)).unwrap(), 0.0);
        assert_eq!(gaussian_nll(2.0, pred(1.0, 1.0)).unwrap(), 0.5);
        assert_eq!(gaussian_nll(0.0, pred(1.0, 1.0)).unwrap(), 0.5);
        let v = gaussian_nll(4.0, pred(4.0, 2.0)).unwrap();
        assert!((v - 0.693_147_180_559_945_3).abs() < 1e-12);
    }

    #[test]
    fn nll_rejects_bad_sigma() {
        let bad = ScorePrediction { mu: 0.0, sigma: -1.0 };
        assert!(gaussian_nll(0.0, bad).is_err());
    }

    #[test]
    fn supervised_examples() {
        assert_eq!(supervised_loss(pred(3.0, 1.0), pred(0.0, 1.0), 3.0, 3.0).unwrap(), (0.0, 0.0));
        let (_, r) = supervised_loss(pred(90.0, 1.0), pred(5.0, 1.0), 90.0, 85.0).unwrap();
        assert_eq!(r, 0.0);
        let (_, r) = supervised_loss(pred(90.0, 1.0), pred(3.0, 1.0), 90.0, 85.0).unwrap();
        assert_eq!(r, 2.0);
    }

    #[test]
    fn unsupervised_examples() {
        assert_eq!(unsupervised_loss(pred(7.0, 1.0), 7.0).unwrap(), 0.0);
        assert_eq!(unsupervised_loss(pred(1.0, 1.0), 3.0).unwrap(), 2.0);
        assert!(unsupervised_loss(pred(1.0, 1.0), f64::NAN).is_err());
    }

    #[test]
    fn unsupervised_grad_wrt_mu() {
        let mut g = Graph::new();
        let raw = g.variable(Tensor::new(vec![1, 2], vec![0.0, 0.0]).unwrap());
        let mu = g.select(raw, 0).unwrap();
        let r = g.select(raw, 1).unwrap();
        let sigma = g.exp(r);
        let head = HeadOutput { raw, mu, sigma };
        let loss = gaussian_nll_on_tape(&mut g, 1.0, &head).unwrap();
        assert_eq!(g.value(loss).data(), &[0.5]);
        let grads = g.backward(loss).unwrap();
        let d = grads.wrt(raw);
        assert!((d.data()[0] + 1.0).abs() < 1e-15);
        // d/dr [r + e^{-2r}/2] at r = 0 is 1 - 1 = 0
        assert!(d.data()[1].abs() < 1e-15);
    }

    #[test]
    fn beta_examples() {
        assert_eq!(beta_at(200.0).unwrap(), 0.2);
        assert!((beta_at(0.0).unwrap() - 0.2 * (-5f64).exp()).abs() < 1e-15);
        assert!((beta_at(0.0).unwrap() - 0.001_347_589_9).abs() < 1e-9);
        assert!((beta_at(100.0).unwrap() - 0.057_301_0).abs() < 1e-7);
        assert_eq!(beta_at(350.0).unwrap(), 0.2);
        assert!(beta_at(-1.0).is_err());
    }

    #[test]
    fn breakdown_total() {
        let b = LossBreakdown::new(1.25, Some(0.5), Some(2.0), 0.1);
        assert!((b.total - 1.95).abs() < 1e-12);
        let b = LossBreakdown::new(1.25, None, None, 0.1);
        assert_eq!(b.total, 1.25);
    }

    proptest! {
        #[test]
        fn nll_bounded_below_by_log_sigma(t in -50.0f64..50.0, mu in -50.0f64..50.0, s in 0.01f64..20.0) {
            let v = gaussian_nll(t, pred(mu, s)).unwrap();
            prop_assert!(v >= s.ln());
            if t == mu { prop_assert_eq!(v, s.ln()); }
        }

        #[test]
        fn nll_minimised_at_residual(t in -5.0f64..5.0, mu in -5.0f64..5.0) {
            let r = (t - mu).abs();
            prop_assume!(r > 0.05);
            let best = gaussian_nll(t, pred(mu, r)).unwrap();
            for k in 1..200 {
                let s = r * (0.2 + k as f64 * 0.02);
                prop_assert!(gaussian_nll(t, pred(mu, s)).unwrap() >= best - 1e-12);
            }
        }

        #[test]
        fn beta_monotone(a in 0.0f64..400.0, b in 0.0f64..400.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(beta_at(lo).unwrap() <= beta_at(hi).unwrap());
            if lo >= 200.0 { prop_assert_eq!(beta_at(lo).unwrap(), 0.2); }
        }
    }
}
