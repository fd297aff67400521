//! Rank correlation and student-only evaluation.

use std::io::Write;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::networks::{predict_score, NetworkConfig};
use crate::params::ParamSet;

/// 1-based ranks with ties sharing their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let avg = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman's rank correlation: Pearson correlation of the average ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::MetricUndefined(format!(
            "series lengths differ: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::MetricUndefined("need at least two observations".into()));
    }
    if x.iter().chain(y).any(|v| v.is_nan()) {
        return Err(Error::MetricUndefined("NaN in series".into()));
    }
    pearson(&average_ranks(x), &average_ranks(y))
        .ok_or_else(|| Error::MetricUndefined("constant series".into()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct PredictionRow {
    pub sample_id: String,
    pub truth: f64,
    pub mu: f64,
    pub sigma: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub spearman: f64,
    pub predictions: Vec<PredictionRow>,
}

impl Evaluation {
    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "sample_id,truth,mu,sigma")?;
        for r in &self.predictions {
            writeln!(out, "{},{},{},{}", r.sample_id, r.truth, r.mu, r.sigma)?;
        }
        Ok(())
    }
}

/// Scores every test sample with the student parameters, unaugmented.
pub fn evaluate(student: &ParamSet, cfg: &NetworkConfig, test: &Dataset) -> Result<Evaluation> {
    let mut predictions = Vec::with_capacity(test.len());
    for s in test.samples() {
        let truth = s.score.ok_or_else(|| {
            Error::contract(format!("test sample {:?} has no score", s.sample_id))
        })?;
        let p = predict_score(student, cfg, &s.features)?;
        predictions.push(PredictionRow {
            sample_id: s.sample_id.clone(),
            truth,
            mu: p.mu,
            sigma: p.sigma,
        });
    }
    let truth: Vec<f64> = predictions.iter().map(|r| r.truth).collect();
    let mu: Vec<f64> = predictions.iter().map(|r| r.mu).collect();
    Ok(Evaluation {
        spearman: spearman(&mu, &truth)?,
        predictions,
    })
}
