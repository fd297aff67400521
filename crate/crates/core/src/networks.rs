//! Score network (Mixer encoder + Gaussian regression head) and the
//! cross-attention reference network.
//!
//! Teacher and student are the same function evaluated with different
//! parameter sets; see [`score_forward`]. The reference network reads a
//! pair of sequences, using the first as query and the second as key and
//! value, and predicts their relative score; see [`reference_forward`].

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{Graph, Tensor, Var};
use crate::error::{Error, Result};
use crate::params::{uniform_weight, Bound, ParamSet};

/// Architecture hyper-parameters shared by all three networks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    /// Snippets per sequence (T).
    pub seq_len: usize,
    /// Feature width per snippet (D).
    pub feat_dim: usize,
    pub mixer_layers: usize,
    pub token_hidden: usize,
    pub channel_hidden: usize,
    /// Query/key width d_k of the single attention head.
    pub attn_dim: usize,
    pub ref_mlp_hidden: usize,
    pub attn_blocks: usize,
}

impl NetworkConfig {
    pub fn new(seq_len: usize, feat_dim: usize) -> Self {
        Self {
            seq_len,
            feat_dim,
            mixer_layers: 2,
            token_hidden: 2 * seq_len,
            channel_hidden: feat_dim,
            attn_dim: (feat_dim / 4).max(1),
            ref_mlp_hidden: feat_dim,
            attn_blocks: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("seq_len", self.seq_len),
            ("feat_dim", self.feat_dim),
            ("token_hidden", self.token_hidden),
            ("channel_hidden", self.channel_hidden),
            ("attn_dim", self.attn_dim),
            ("ref_mlp_hidden", self.ref_mlp_hidden),
        ];
        for (name, v) in fields {
            if v == 0 {
                return Err(Error::config(format!("{name} must be at least 1")));
            }
        }
        Ok(())
    }

    fn check_input(&self, t: &Tensor) -> Result<()> {
        if t.shape() != [self.seq_len, self.feat_dim] {
            return Err(Error::Dimension {
                op: "network input",
                left: t.shape().to_vec(),
                right: vec![self.seq_len, self.feat_dim],
            });
        }
        Ok(())
    }
}

/// Predicted score with its Gaussian standard deviation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScorePrediction {
    pub mu: f64,
    pub sigma: f64,
}

impl ScorePrediction {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) || !mu.is_finite() {
            return Err(Error::contract(format!(
                "invalid prediction mu={mu} sigma={sigma}"
            )));
        }
        Ok(Self { mu, sigma })
    }

    /// Maps the two raw head outputs to `(mu, exp(r))`.
    pub fn from_raw(m: f64, r: f64) -> Result<Self> {
        Self::new(m, r.exp())
    }
}

/// Head outputs as tape nodes.
#[derive(Clone, Copy, Debug)]
pub struct HeadOutput {
    pub raw: Var,
    pub mu: Var,
    pub sigma: Var,
}

impl HeadOutput {
    pub fn prediction(&self, g: &Graph) -> Result<ScorePrediction> {
        ScorePrediction::new(g.value(self.mu).data()[0], g.value(self.sigma).data()[0])
    }
}

fn insert_layer_norm(p: &mut ParamSet, prefix: &str, dim: usize) -> Result<()> {
    p.insert(format!("{prefix}.gamma"), Tensor::filled(&[dim], 1.0))?;
    p.insert(format!("{prefix}.beta"), Tensor::zeros(&[dim]))
}

fn insert_linear(
    p: &mut ParamSet,
    rng: &mut impl Rng,
    prefix: &str,
    fan_in: usize,
    fan_out: usize,
) -> Result<()> {
    p.insert(format!("{prefix}.w"), uniform_weight(rng, fan_in, fan_out))?;
    p.insert(format!("{prefix}.b"), Tensor::zeros(&[fan_out]))
}

fn insert_head(p: &mut ParamSet, rng: &mut impl Rng, dim: usize) -> Result<()> {
    insert_linear(p, rng, "head", dim, 2)
}

/// Parameters for the teacher/student score network.
pub fn init_score_network(cfg: &NetworkConfig, rng: &mut impl Rng) -> Result<ParamSet> {
    cfg.validate()?;
    let (t, d) = (cfg.seq_len, cfg.feat_dim);
    let mut p = ParamSet::new();
    for l in 0..cfg.mixer_layers {
        let pre = format!("mixer.{l}");
        insert_layer_norm(&mut p, &format!("{pre}.token_ln"), d)?;
        insert_linear(&mut p, rng, &format!("{pre}.token_fc1"), t, cfg.token_hidden)?;
        insert_linear(&mut p, rng, &format!("{pre}.token_fc2"), cfg.token_hidden, t)?;
        insert_layer_norm(&mut p, &format!("{pre}.channel_ln"), d)?;
        insert_linear(&mut p, rng, &format!("{pre}.channel_fc1"), d, cfg.channel_hidden)?;
        insert_linear(&mut p, rng, &format!("{pre}.channel_fc2"), cfg.channel_hidden, d)?;
    }
    insert_head(&mut p, rng, d)?;
    Ok(p)
}

/// Parameters for the cross-attention reference network.
pub fn init_reference_network(cfg: &NetworkConfig, rng: &mut impl Rng) -> Result<ParamSet> {
    cfg.validate()?;
    let (d, dk) = (cfg.feat_dim, cfg.attn_dim);
    let mut p = ParamSet::new();
    for k in 0..cfg.attn_blocks {
        let pre = format!("attn.{k}");
        insert_layer_norm(&mut p, &format!("{pre}.ln"), d)?;
        for proj in ["wq", "wk", "wv"] {
            p.insert(format!("{pre}.{proj}"), uniform_weight(rng, d, dk))?;
        }
        p.insert(format!("{pre}.wo"), uniform_weight(rng, dk, d))?;
        insert_layer_norm(&mut p, &format!("{pre}.mlp_ln"), d)?;
        insert_linear(&mut p, rng, &format!("{pre}.mlp_fc1"), d, cfg.ref_mlp_hidden)?;
        insert_linear(&mut p, rng, &format!("{pre}.mlp_fc2"), cfg.ref_mlp_hidden, d)?;
    }
    insert_head(&mut p, rng, d)?;
    Ok(p)
}

fn linear(g: &mut Graph, p: &Bound, prefix: &str, x: Var) -> Result<Var> {
    let w = p.var(&format!("{prefix}.w"))?;
    let b = p.var(&format!("{prefix}.b"))?;
    let y = g.matmul(x, w)?;
    g.add_row(y, b)
}

fn layer_norm(g: &mut Graph, p: &Bound, prefix: &str, x: Var) -> Result<Var> {
    let gamma = p.var(&format!("{prefix}.gamma"))?;
    let beta = p.var(&format!("{prefix}.beta"))?;
    g.layer_norm(x, gamma, beta)
}

/// fc2(gelu(fc1(x)))
fn mlp(g: &mut Graph, p: &Bound, fc1: &str, fc2: &str, x: Var) -> Result<Var> {
    let h = linear(g, p, fc1, x)?;
    let h = g.gelu(h);
    linear(g, p, fc2, h)
}

/// One Mixer layer on a `[T×D]` input.
///
/// Token mixing runs the MLP along the snippet axis (on the transposed
/// normalized input), channel mixing along the feature axis; both are
/// residual.
pub fn mixer_layer(g: &mut Graph, p: &Bound, prefix: &str, x: Var) -> Result<Var> {
    let normed = layer_norm(g, p, &format!("{prefix}.token_ln"), x)?;
    let across_time = g.transpose(normed)?;
    let mixed = mlp(
        g,
        p,
        &format!("{prefix}.token_fc1"),
        &format!("{prefix}.token_fc2"),
        across_time,
    )?;
    let mixed = g.transpose(mixed)?;
    let tokens = g.add(x, mixed)?;

    let normed = layer_norm(g, p, &format!("{prefix}.channel_ln"), tokens)?;
    let mixed = mlp(
        g,
        p,
        &format!("{prefix}.channel_fc1"),
        &format!("{prefix}.channel_fc2"),
        normed,
    )?;
    g.add(tokens, mixed)
}

pub fn mixer_forward(g: &mut Graph, p: &Bound, cfg: &NetworkConfig, x: Var) -> Result<Var> {
    cfg.check_input(g.value(x))?;
    let mut h = x;
    for l in 0..cfg.mixer_layers {
        h = mixer_layer(g, p, &format!("mixer.{l}"), h)?;
    }
    Ok(h)
}

/// Mean-pools `[T×D]` over snippets, then a linear map to `(m, r)` with
/// `mu = m`, `sigma = exp(r)`.
pub fn regression_head(g: &mut Graph, p: &Bound, encoded: Var) -> Result<HeadOutput> {
    let pooled = g.mean_rows(encoded)?;
    let raw = linear(g, p, "head", pooled)?;
    let mu = g.select(raw, 0)?;
    let log_sigma = g.select(raw, 1)?;
    let sigma = g.exp(log_sigma);
    Ok(HeadOutput { raw, mu, sigma })
}

/// Teacher/student forward pass.
pub fn score_forward(g: &mut Graph, p: &Bound, cfg: &NetworkConfig, x: Var) -> Result<HeadOutput> {
    let encoded = mixer_forward(g, p, cfg, x)?;
    regression_head(g, p, encoded)
}

#[derive(Clone, Copy, Debug)]
pub struct CrossAttentionOutput {
    pub out: Var,
    /// `[T_query × T_key]` row-stochastic attention matrix.
    pub weights: Var,
}

/// One cross-attention block: query from `query`, key and value from
/// `context`, both layer-normalized independently with shared parameters,
/// followed by a residual MLP.
pub fn cross_attention_block(
    g: &mut Graph,
    p: &Bound,
    prefix: &str,
    cfg: &NetworkConfig,
    query: Var,
    context: Var,
) -> Result<CrossAttentionOutput> {
    let q_in = layer_norm(g, p, &format!("{prefix}.ln"), query)?;
    let kv_in = layer_norm(g, p, &format!("{prefix}.ln"), context)?;
    let q = g.matmul(q_in, p.var(&format!("{prefix}.wq"))?)?;
    let k = g.matmul(kv_in, p.var(&format!("{prefix}.wk"))?)?;
    let v = g.matmul(kv_in, p.var(&format!("{prefix}.wv"))?)?;
    let kt = g.transpose(k)?;
    let scores = g.matmul(q, kt)?;
    let scores = g.scale(scores, 1.0 / (cfg.attn_dim as f64).sqrt());
    let weights = g.softmax(scores);
    let attended = g.matmul(weights, v)?;
    let attended = g.matmul(attended, p.var(&format!("{prefix}.wo"))?)?;
    let first = g.add(attended, query)?;

    let normed = layer_norm(g, p, &format!("{prefix}.mlp_ln"), first)?;
    let mixed = mlp(
        g,
        p,
        &format!("{prefix}.mlp_fc1"),
        &format!("{prefix}.mlp_fc2"),
        normed,
    )?;
    let out = g.add(mixed, first)?;
    Ok(CrossAttentionOutput { out, weights })
}

/// Reference forward pass: relative score of `target` with respect to
/// `exemplar`.
pub fn reference_forward(
    g: &mut Graph,
    p: &Bound,
    cfg: &NetworkConfig,
    target: Var,
    exemplar: Var,
) -> Result<HeadOutput> {
    cfg.check_input(g.value(target))?;
    cfg.check_input(g.value(exemplar))?;
    let mut h = target;
    for k in 0..cfg.attn_blocks {
        h = cross_attention_block(g, p, &format!("attn.{k}"), cfg, h, exemplar)?.out;
    }
    regression_head(g, p, h)
}

/// Gradient-free teacher/student prediction.
pub fn predict_score(
    params: &ParamSet,
    cfg: &NetworkConfig,
    features: &Tensor,
) -> Result<ScorePrediction> {
    let mut g = Graph::new();
    let p = params.bind(&mut g, false);
    let x = g.constant(features.clone());
    score_forward(&mut g, &p, cfg, x)?.prediction(&g)
}

/// Gradient-free reference prediction of the relative score.
pub fn predict_relative(
    params: &ParamSet,
    cfg: &NetworkConfig,
    target: &Tensor,
    exemplar: &Tensor,
) -> Result<ScorePrediction> {
    let mut g = Graph::new();
    let p = params.bind(&mut g, false);
    let t = g.constant(target.clone());
    let e = g.constant(exemplar.clone());
    reference_forward(&mut g, &p, cfg, t, e)?.prediction(&g)
}
