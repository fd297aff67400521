use std::collections::HashSet;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::augment::{augment_features, AugmentParams, Strength};
use super::config::TrainConfig;
use super::optim::Adam;
use crate::autodiff::{Graph, Var};
use crate::data::{Dataset, FeatureSequence};
use crate::error::{Error, Result};
use crate::eval::evaluate;
use crate::memory::{fuse_scores, ConfidenceMemory, MemoryKind};
use crate::networks::{
    init_reference_network, init_score_network, predict_relative, predict_score, reference_forward,
    score_forward, NetworkConfig,
};
use crate::objectives::{gaussian_nll_on_tape, relative_target, LossBreakdown};
use crate::params::{Bound, ParamSet};
use crate::rng::{hash_id, stream, Purpose};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    BurnIn,
    Trs,
}

/// Blends the student into the teacher: `θ_t ← α·θ_t + (1−α)·θ_s`.
pub fn ema_update_in_place(theta_t: &mut ParamSet, theta_s: &ParamSet, alpha: f64) -> Result<()> {
    if !theta_t.same_layout(theta_s) {
        return Err(Error::contract("EMA needs parameter sets with identical names and shapes"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::contract(format!("alpha must be in (0,1), got {alpha}")));
    }
    let src: Vec<&[f64]> = theta_s.iter().map(|p| p.tensor.data()).collect();
    theta_t.update_each(|i, t| {
        for (w, &s) in t.data_mut().iter_mut().zip(src[i]) {
            *w = alpha * *w + (1.0 - alpha) * s;
        }
    });
    Ok(())
}

pub fn ema_update(theta_t: &ParamSet, theta_s: &ParamSet, alpha: f64) -> Result<ParamSet> {
    let mut out = theta_t.clone();
    ema_update_in_place(&mut out, theta_s, alpha)?;
    Ok(out)
}

/// One row of the metrics log.
#[derive(Clone, Debug, PartialEq)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub losses: LossBreakdown,
    pub val_spearman: Option<f64>,
}

pub const METRICS_HEADER: &str = "epoch,l_reg_s,l_reg_r,l_unsup,beta,total,val_spearman";

fn opt_field(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl EpochMetrics {
    pub fn to_csv_row(&self) -> String {
        let l = &self.losses;
        format!(
            "{},{},{},{},{},{},{}",
            self.epoch,
            l.l_reg_s,
            opt_field(l.l_reg_r),
            opt_field(l.l_unsup),
            l.beta,
            l.total,
            opt_field(self.val_spearman)
        )
    }

    pub fn from_csv_row(line: &str) -> Result<Self> {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            return Err(Error::contract(format!("metrics row needs 7 fields: {line:?}")));
        }
        let num = |s: &str| -> Result<f64> {
            s.parse().map_err(|_| Error::contract(format!("bad number {s:?} in metrics row")))
        };
        let opt = |s: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                num(s).map(Some)
            }
        };
        Ok(Self {
            epoch: f[0]
                .parse()
                .map_err(|_| Error::contract(format!("bad epoch {:?}", f[0])))?,
            losses: LossBreakdown {
                l_reg_s: num(f[1])?,
                l_reg_r: opt(f[2])?,
                l_unsup: opt(f[3])?,
                beta: num(f[4])?,
                total: num(f[5])?,
            },
            val_spearman: opt(f[6])?,
        })
    }
}

pub fn write_metrics_csv(rows: &[EpochMetrics], mut out: impl Write) -> Result<()> {
    writeln!(out, "{METRICS_HEADER}")?;
    for r in rows {
        writeln!(out, "{}", r.to_csv_row())?;
    }
    Ok(())
}

pub fn metrics_csv_string(rows: &[EpochMetrics]) -> String {
    let mut buf = Vec::new();
    write_metrics_csv(rows, &mut buf).expect("writing to a Vec");
    String::from_utf8(buf).expect("ascii csv")
}

pub fn parse_metrics_csv(text: &str) -> Result<Vec<EpochMetrics>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == METRICS_HEADER => {}
        _ => return Err(Error::contract("metrics CSV lacks the expected header")),
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(EpochMetrics::from_csv_row)
        .collect()
}

/// Full training state: the three parameter sets, their optimizers, both
/// memories, and the epoch counter (number of completed epochs).
#[derive(Clone, Debug, PartialEq)]
pub struct TrsState {
    pub config: TrainConfig,
    pub network: NetworkConfig,
    pub theta_t: ParamSet,
    pub theta_s: Option<ParamSet>,
    pub theta_f: Option<ParamSet>,
    pub opt_t: Adam,
    pub opt_s: Option<Adam>,
    pub opt_f: Option<Adam>,
    pub epoch: usize,
    pub stage: Stage,
    pub m_t: ConfidenceMemory,
    pub m_r: ConfidenceMemory,
}

fn mean_of(g: &mut Graph, terms: &[Var]) -> Result<Option<Var>> {
    let Some((&first, rest)) = terms.split_first() else {
        return Ok(None);
    };
    let mut acc = first;
    for &t in rest {
        acc = g.add(acc, t)?;
    }
    Ok(Some(g.scale(acc, 1.0 / terms.len() as f64)))
}

fn scalar_of(g: &Graph, v: Var) -> f64 {
    g.value(v).data()[0]
}

fn shuffled(seed: u64, purpose: Purpose, epoch: usize, n: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut stream(seed, purpose, &[epoch as u64]));
    order
}

/// The `(index, pass)` pairs drawn at `step`, cycling through `order`.
fn draws(order: &[usize], step: usize, batch: usize) -> Vec<(usize, u64)> {
    let n = order.len();
    (step * batch..(step + 1) * batch)
        .map(|k| (order[k % n], (k / n) as u64))
        .collect()
}

fn label_of(s: &FeatureSequence) -> Result<f64> {
    s.score
        .ok_or_else(|| Error::contract(format!("labeled sample {:?} has no score", s.sample_id)))
}

/// Running sums of per-step loss values.
#[derive(Default)]
struct Accum {
    steps: usize,
    s: f64,
    r: f64,
    u: f64,
    has_r: bool,
    has_u: bool,
}

impl Accum {
    fn push(&mut self, s: f64, r: Option<f64>, u: Option<f64>) {
        self.steps += 1;
        self.s += s;
        if let Some(r) = r {
            self.r += r;
            self.has_r = true;
        }
        if let Some(u) = u {
            self.u += u;
            self.has_u = true;
        }
    }

    fn finish(&self, beta: f64) -> LossBreakdown {
        let n = self.steps.max(1) as f64;
        LossBreakdown::new(
            self.s / n,
            self.has_r.then(|| self.r / n),
            self.has_u.then(|| self.u / n),
            beta,
        )
    }
}

impl TrsState {
    pub fn new(config: TrainConfig, network: NetworkConfig) -> Result<Self> {
        config.validate()?;
        network.validate()?;
        let theta_t = init_score_network(&network, &mut stream(config.seed, Purpose::Init, &[0]))?;
        let theta_f = if config.toggles.reference_network {
            Some(init_reference_network(
                &network,
                &mut stream(config.seed, Purpose::Init, &[1]),
            )?)
        } else {
            None
        };
        let opt_t = Adam::new(
            &theta_t,
            config.learning_rate,
            config.adam_beta1,
            config.adam_beta2,
            config.adam_epsilon,
        );
        let opt_f = theta_f.as_ref().map(|p| {
            Adam::new(
                p,
                config.learning_rate,
                config.adam_beta1,
                config.adam_beta2,
                config.adam_epsilon,
            )
        });
        Ok(Self {
            config,
            network,
            theta_t,
            theta_s: None,
            theta_f,
            opt_t,
            opt_s: None,
            opt_f,
            epoch: 0,
            stage: Stage::BurnIn,
            m_t: ConfidenceMemory::new(MemoryKind::Teacher),
            m_r: ConfidenceMemory::new(MemoryKind::Reference),
        })
    }

    fn augment_params(&self) -> AugmentParams {
        AugmentParams {
            flip_probability: self.config.flip_probability,
            noise_std: self.config.augment_noise_std,
        }
    }

    fn partner(&self, purpose: Purpose, id: &str, pass: u64, n: usize) -> usize {
        stream(self.config.seed, purpose, &[self.epoch as u64, hash_id(id), pass]).random_range(0..n)
    }

    /// Supervised terms for one labeled draw: score loss through `score`,
    /// relative loss through `reference` against a random labeled partner.
    fn labeled_terms(
        &self,
        g: &mut Graph,
        score: &Bound,
        reference: Option<&Bound>,
        labeled: &[&FeatureSequence],
        batch: &[(usize, u64)],
    ) -> Result<(Var, Option<Var>)> {
        let mut ls = Vec::with_capacity(batch.len());
        let mut lr = Vec::with_capacity(batch.len());
        for &(i, pass) in batch {
            let p = labeled[i];
            let s_p = label_of(p)?;
            let x = g.constant(p.features.clone());
            let head = score_forward(g, score, &self.network, x)?;
            ls.push(gaussian_nll_on_tape(g, s_p, &head)?);
            if let Some(rb) = reference {
                let q = labeled[self.partner(Purpose::PartnerLabeled, &p.sample_id, pass, labeled.len())];
                let xq = g.constant(q.features.clone());
                let rel = reference_forward(g, rb, &self.network, x, xq)?;
                let s_q = label_of(q)?;
                let target = if self.config.signed_relative_target {
                    s_p - s_q
                } else {
                    relative_target(s_p, s_q)
                };
                lr.push(gaussian_nll_on_tape(g, target, &rel)?);
            }
        }
        Ok((mean_of(g, &ls)?.expect("non-empty batch"), mean_of(g, &lr)?))
    }

    fn steps_for(&self, count: usize) -> usize {
        self.config
            .steps_per_epoch
            .unwrap_or_else(|| count.div_ceil(self.config.batch_size))
    }

    /// One supervised epoch on θ_t (and θ_f when present), without stage
    /// bookkeeping.
    fn supervised_epoch(&mut self, labeled: &[&FeatureSequence]) -> Result<LossBreakdown> {
        if labeled.is_empty() {
            return Err(Error::config("training needs at least one labeled sample"));
        }
        let n = labeled.len();
        let order = shuffled(self.config.seed, Purpose::ShuffleLabeled, self.epoch, n);
        let mut acc = Accum::default();
        for step in 0..self.steps_for(n) {
            let batch = draws(&order, step, self.config.batch_size);
            let (gt, gf, vs, vr) = {
                let mut g = Graph::new();
                let pt = self.theta_t.bind(&mut g, true);
                let pf = self.theta_f.as_ref().map(|p| p.bind(&mut g, true));
                let (l_s, l_r) = self.labeled_terms(&mut g, &pt, pf.as_ref(), labeled, &batch)?;
                let loss = match l_r {
                    Some(r) => g.add(l_s, r)?,
                    None => l_s,
                };
                let grads = g.backward(loss)?;
                (
                    pt.grads(&grads),
                    pf.map(|b| b.grads(&grads)),
                    scalar_of(&g, l_s),
                    l_r.map(|v| scalar_of(&g, v)),
                )
            };
            self.opt_t.step(&mut self.theta_t, &gt)?;
            if let (Some(p), Some(o), Some(gf)) = (self.theta_f.as_mut(), self.opt_f.as_mut(), gf) {
                o.step(p, &gf)?;
            }
            acc.push(vs, vr, None);
        }
        self.epoch += 1;
        Ok(acc.finish(0.0))
    }

    /// Burn-in epoch: supervised updates of θ_t and θ_f on labeled pairs.
    pub fn burn_in_epoch(&mut self, labeled: &[&FeatureSequence]) -> Result<LossBreakdown> {
        if self.stage != Stage::BurnIn || self.epoch >= self.config.burn_in_epochs {
            return Err(Error::contract(format!(
                "burn-in epoch requested at epoch {} in stage {:?}",
                self.epoch, self.stage
            )));
        }
        self.supervised_epoch(labeled)
    }

    /// Copies θ_t (and its optimizer moments) into a fresh student.
    pub fn initialize_student(&mut self) -> Result<()> {
        if self.stage != Stage::BurnIn || self.theta_s.is_some() {
            return Err(Error::contract("student already initialized"));
        }
        if self.epoch != self.config.burn_in_epochs {
            return Err(Error::contract(format!(
                "student initialized at epoch {}, expected {}",
                self.epoch, self.config.burn_in_epochs
            )));
        }
        let mut student = ParamSet::new();
        for p in self.theta_t.iter() {
            student.insert(p.name.clone(), p.tensor.clone())?;
        }
        self.theta_s = Some(student);
        self.opt_s = Some(self.opt_t.clone());
        self.m_t.clear();
        self.m_r.clear();
        self.stage = Stage::Trs;
        Ok(())
    }

    /// Pseudo-label for one unlabeled draw, updating the memories.
    fn pseudo_label(&mut self, u: &FeatureSequence, pass: u64, labeled: &[&FeatureSequence]) -> Result<f64> {
        let (seed, epoch) = (self.config.seed, self.epoch as u64);
        let toggles = self.config.toggles;
        let key = [epoch, hash_id(&u.sample_id), pass];
        let weak = augment_features(
            &u.features,
            Strength::Weak,
            self.augment_params(),
            &mut stream(seed, Purpose::AugmentWeak, &key),
        );
        let t = predict_score(&self.theta_t, &self.network, &weak)?;
        let mut t_score = t.mu;
        if toggles.teacher_memory {
            self.m_t.maybe_write(&u.sample_id, t.mu, t.sigma, epoch)?;
            t_score = self.m_t.read(&u.sample_id).map_or(t.mu, |e| e.score);
        }
        let Some(theta_f) = self.theta_f.as_ref() else {
            return Ok(t_score);
        };
        let l = labeled[self.partner(Purpose::PartnerUnlabeled, &u.sample_id, pass, labeled.len())];
        let rel = predict_relative(theta_f, &self.network, &weak, &l.features)?;
        let absolute = label_of(l)? + rel.mu;
        let mut r_score = absolute;
        if toggles.reference_memory {
            self.m_r.maybe_write(&u.sample_id, absolute, rel.sigma, epoch)?;
            r_score = self.m_r.read(&u.sample_id).map_or(absolute, |e| e.score);
        }
        Ok(fuse_scores(t_score, r_score))
    }

    /// Teacher-reference-student epoch followed by one EMA update of θ_t.
    pub fn trs_epoch(
        &mut self,
        labeled: &[&FeatureSequence],
        unlabeled: &[&FeatureSequence],
        beta: f64,
    ) -> Result<LossBreakdown> {
        if self.stage != Stage::Trs || self.theta_s.is_none() {
            return Err(Error::contract("TRS epoch requested before student initialization"));
        }
        if self.epoch >= self.config.max_epochs {
            return Err(Error::contract("training already reached max_epochs"));
        }
        if labeled.is_empty() {
            return Err(Error::config("TRS stage needs labeled samples for pairing"));
        }
        let (n, m) = (labeled.len(), unlabeled.len());
        let seed = self.config.seed;
        let l_order = shuffled(seed, Purpose::ShuffleLabeled, self.epoch, n);
        let u_order = shuffled(seed, Purpose::ShuffleUnlabeled, self.epoch, m);
        let strong_params = self.augment_params();
        let mut acc = Accum::default();
        for step in 0..self.steps_for(n.max(m)) {
            let l_batch = draws(&l_order, step, self.config.batch_size);
            let u_batch = if m > 0 {
                draws(&u_order, step, self.config.batch_size)
            } else {
                Vec::new()
            };
            let mut targets = Vec::with_capacity(u_batch.len());
            for &(j, pass) in &u_batch {
                targets.push(self.pseudo_label(unlabeled[j], pass, labeled)?);
            }

            let theta_s = self.theta_s.as_ref().expect("checked above");
            let (gs, gf, vs, vr, vu) = {
                let mut g = Graph::new();
                let ps = theta_s.bind(&mut g, true);
                let pf = self.theta_f.as_ref().map(|p| p.bind(&mut g, true));
                let (l_s, l_r) = self.labeled_terms(&mut g, &ps, pf.as_ref(), labeled, &l_batch)?;
                let mut lu = Vec::with_capacity(u_batch.len());
                for (&(j, pass), &target) in u_batch.iter().zip(&targets) {
                    let u = unlabeled[j];
                    let key = [self.epoch as u64, hash_id(&u.sample_id), pass];
                    let strong = augment_features(
                        &u.features,
                        Strength::Strong,
                        strong_params,
                        &mut stream(seed, Purpose::AugmentStrong, &key),
                    );
                    let x = g.constant(strong);
                    let head = score_forward(&mut g, &ps, &self.network, x)?;
                    lu.push(gaussian_nll_on_tape(&mut g, target, &head)?);
                }
                let l_u = mean_of(&mut g, &lu)?;
                let mut loss = l_s;
                if let Some(r) = l_r {
                    loss = g.add(loss, r)?;
                }
                if let Some(u) = l_u {
                    let weighted = g.scale(u, beta);
                    loss = g.add(loss, weighted)?;
                }
                let grads = g.backward(loss)?;
                (
                    ps.grads(&grads),
                    pf.map(|b| b.grads(&grads)),
                    scalar_of(&g, l_s),
                    l_r.map(|v| scalar_of(&g, v)),
                    l_u.map(|v| scalar_of(&g, v)),
                )
            };
            let theta_s = self.theta_s.as_mut().expect("checked above");
            self.opt_s.as_mut().expect("student optimizer").step(theta_s, &gs)?;
            if let (Some(p), Some(o), Some(gf)) = (self.theta_f.as_mut(), self.opt_f.as_mut(), gf) {
                o.step(p, &gf)?;
            }
            acc.push(vs, vr, vu);
        }
        let theta_s = self.theta_s.as_ref().expect("checked above");
        ema_update_in_place(&mut self.theta_t, theta_s, self.config.alpha)?;
        self.epoch += 1;
        Ok(acc.finish(beta))
    }
}

/// Labeled and unlabeled views of the training data.
fn split_views<'a>(labeled: &'a Dataset, unlabeled: &'a Dataset) -> Result<(Vec<&'a FeatureSequence>, Vec<&'a FeatureSequence>)> {
    let l: Vec<&FeatureSequence> = labeled.samples().iter().collect();
    let u: Vec<&FeatureSequence> = unlabeled.samples().iter().collect();
    if l.is_empty() {
        return Err(Error::config("training needs at least one labeled sample"));
    }
    for s in &l {
        label_of(s)?;
    }
    let ids: HashSet<&str> = l.iter().map(|s| s.sample_id.as_str()).collect();
    if let Some(dup) = u.iter().find(|s| ids.contains(s.sample_id.as_str())) {
        return Err(Error::contract(format!(
            "sample {:?} appears in both labeled and unlabeled sets",
            dup.sample_id
        )));
    }
    if let (Some(a), Some(b)) = (labeled.shape(), unlabeled.shape()) {
        if a != b {
            return Err(Error::contract(format!("labeled shape {a:?} differs from unlabeled {b:?}")));
        }
    }
    Ok((l, u))
}

fn validation_spearman(params: &ParamSet, network: &NetworkConfig, val: Option<&Dataset>) -> Result<Option<f64>> {
    let Some(val) = val else { return Ok(None) };
    match evaluate(params, network, val) {
        Ok(e) => Ok(Some(e.spearman)),
        Err(Error::MetricUndefined(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub theta_t: ParamSet,
    pub theta_s: ParamSet,
    pub theta_f: Option<ParamSet>,
    pub network: NetworkConfig,
    pub metrics: Vec<EpochMetrics>,
}

/// Epoch-by-epoch driver over a [`TrsState`].
pub struct Trainer<'a> {
    state: TrsState,
    labeled: Vec<&'a FeatureSequence>,
    unlabeled: Vec<&'a FeatureSequence>,
    validation: Option<&'a Dataset>,
    metrics: Vec<EpochMetrics>,
}

impl<'a> Trainer<'a> {
    pub fn new(
        config: TrainConfig,
        labeled: &'a Dataset,
        unlabeled: &'a Dataset,
        validation: Option<&'a Dataset>,
    ) -> Result<Self> {
        let (t, d) = labeled
            .shape()
            .ok_or_else(|| Error::config("training needs at least one labeled sample"))?;
        let network = config.network(t, d);
        let state = TrsState::new(config, network)?;
        Self::resume(state, Vec::new(), labeled, unlabeled, validation)
    }

    pub fn resume(
        state: TrsState,
        metrics: Vec<EpochMetrics>,
        labeled: &'a Dataset,
        unlabeled: &'a Dataset,
        validation: Option<&'a Dataset>,
    ) -> Result<Self> {
        let (l, u) = split_views(labeled, unlabeled)?;
        if l[0].seq_len() != state.network.seq_len || l[0].feat_dim() != state.network.feat_dim {
            return Err(Error::contract("dataset shape does not match the network"));
        }
        if metrics.len() != state.epoch {
            return Err(Error::contract(format!(
                "metrics log has {} rows for {} completed epochs",
                metrics.len(),
                state.epoch
            )));
        }
        Ok(Self {
            state,
            labeled: l,
            unlabeled: u,
            validation,
            metrics,
        })
    }

    pub fn state(&self) -> &TrsState {
        &self.state
    }

    pub fn metrics(&self) -> &[EpochMetrics] {
        &self.metrics
    }

    pub fn is_finished(&self) -> bool {
        self.state.epoch >= self.state.config.max_epochs
    }

    pub fn run_epoch(&mut self) -> Result<&EpochMetrics> {
        if self.is_finished() {
            return Err(Error::contract("training already finished"));
        }
        let epoch = self.state.epoch;
        let (losses, val) = if epoch < self.state.config.burn_in_epochs {
            (self.state.burn_in_epoch(&self.labeled)?, None)
        } else {
            if self.state.stage == Stage::BurnIn {
                self.state.initialize_student()?;
            }
            let beta = self.state.config.beta_schedule.at(epoch as f64)?;
            let losses = self.state.trs_epoch(&self.labeled, &self.unlabeled, beta)?;
            let student = self.state.theta_s.as_ref().expect("initialized");
            (losses, validation_spearman(student, &self.state.network, self.validation)?)
        };
        self.metrics.push(EpochMetrics {
            epoch,
            losses,
            val_spearman: val,
        });
        Ok(self.metrics.last().expect("just pushed"))
    }

    /// Runs to `max_epochs`, calling `on_epoch` after every epoch.
    pub fn run(mut self, mut on_epoch: impl FnMut(&TrsState, &[EpochMetrics]) -> Result<()>) -> Result<TrainOutcome> {
        while !self.is_finished() {
            self.run_epoch()?;
            on_epoch(&self.state, &self.metrics)?;
        }
        self.finish()
    }

    pub fn finish(self) -> Result<TrainOutcome> {
        let theta_s = self
            .state
            .theta_s
            .ok_or_else(|| Error::contract("training stopped before the student existed"))?;
        Ok(TrainOutcome {
            theta_t: self.state.theta_t,
            theta_s,
            theta_f: self.state.theta_f,
            network: self.state.network,
            metrics: self.metrics,
        })
    }
}

/// Burn-in, student initialization and TRS epochs up to `max_epochs`.
pub fn train(
    config: &TrainConfig,
    labeled: &Dataset,
    unlabeled: &Dataset,
    validation: Option<&Dataset>,
) -> Result<TrainOutcome> {
    Trainer::new(config.clone(), labeled, unlabeled, validation)?.run(|_, _| Ok(()))
}

#[derive(Clone, Debug)]
pub struct SupervisedOutcome {
    pub params: ParamSet,
    pub network: NetworkConfig,
    pub metrics: Vec<EpochMetrics>,
}

/// Plain supervised regression of one score network for `max_epochs`.
///
/// Uses the same initialization, shuffling and step counts as the
/// teacher's burn-in, so it doubles as the reference trajectory for
/// degenerate TRS runs.
pub fn train_supervised(
    config: &TrainConfig,
    labeled: &Dataset,
    validation: Option<&Dataset>,
) -> Result<SupervisedOutcome> {
    let mut cfg = config.clone();
    cfg.toggles.reference_network = false;
    let empty = Dataset::new(Vec::new())?;
    let (l, _) = split_views(labeled, &empty)?;
    let network = cfg.network(l[0].seq_len(), l[0].feat_dim());
    let mut state = TrsState::new(cfg, network)?;
    let mut metrics = Vec::with_capacity(state.config.max_epochs);
    while state.epoch < state.config.max_epochs {
        let epoch = state.epoch;
        let losses = state.supervised_epoch(&l)?;
        metrics.push(EpochMetrics {
            epoch,
            losses,
            val_spearman: validation_spearman(&state.theta_t, &state.network, validation)?,
        });
    }
    Ok(SupervisedOutcome {
        params: state.theta_t,
        network: state.network,
        metrics,
    })
}
