use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::networks::NetworkConfig;
use crate::objectives::BetaSchedule;

/// Which optional components take part in training.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentToggles {
    pub reference_network: bool,
    pub teacher_memory: bool,
    pub reference_memory: bool,
}

impl ComponentToggles {
    pub const ALL: Self = Self {
        reference_network: true,
        teacher_memory: true,
        reference_memory: true,
    };

    pub const NONE: Self = Self {
        reference_network: false,
        teacher_memory: false,
        reference_memory: false,
    };
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// EMA momentum for the teacher.
    pub alpha: f64,
    pub burn_in_epochs: usize,
    pub max_epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub batch_size: usize,
    /// Optimizer steps per epoch; `None` derives it from the set sizes.
    pub steps_per_epoch: Option<usize>,
    pub toggles: ComponentToggles,
    /// Train the reference network on `s − s_l` instead of `|s − s_l|`.
    /// Its pseudo-label is `s_l + Δs` either way, which is only unbiased
    /// with the signed target.
    #[serde(default)]
    pub signed_relative_target: bool,
    pub augment_noise_std: f64,
    pub flip_probability: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    pub beta_schedule: BetaSchedule,
    pub mixer_layers: Option<usize>,
    pub token_hidden: Option<usize>,
    pub channel_hidden: Option<usize>,
    pub attn_dim: Option<usize>,
    pub ref_mlp_hidden: Option<usize>,
    pub attn_blocks: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            alpha: 0.99,
            burn_in_epochs: 30,
            max_epochs: 150,
            learning_rate: 2e-4,
            seed: 0,
            batch_size: 8,
            steps_per_epoch: None,
            toggles: ComponentToggles::ALL,
            signed_relative_target: false,
            augment_noise_std: 0.1,
            flip_probability: 0.5,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
            beta_schedule: BetaSchedule::default(),
            mixer_layers: None,
            token_hidden: None,
            channel_hidden: None,
            attn_dim: None,
            ref_mlp_hidden: None,
            attn_blocks: None,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::config(format!("invalid value {value:?} for `{key}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(Error::config(format!("invalid boolean {value:?} for `{key}`"))),
    }
}

fn parse_opt(key: &str, value: &str) -> Result<Option<usize>> {
    match value {
        "" | "auto" | "none" => Ok(None),
        v => parse(key, v).map(Some),
    }
}

fn opt_str(v: Option<usize>) -> String {
    v.map_or_else(|| "auto".to_string(), |n| n.to_string())
}

impl TrainConfig {
    pub const KEYS: &'static [&'static str] = &[
        "alpha",
        "burn_in_epochs",
        "max_epochs",
        "learning_rate",
        "seed",
        "batch_size",
        "steps_per_epoch",
        "reference_network",
        "teacher_memory",
        "reference_memory",
        "signed_relative_target",
        "augment_noise_std",
        "flip_probability",
        "adam_beta1",
        "adam_beta2",
        "adam_epsilon",
        "beta_peak",
        "beta_sharpness",
        "beta_horizon",
        "mixer_layers",
        "token_hidden",
        "channel_hidden",
        "attn_dim",
        "ref_mlp_hidden",
        "attn_blocks",
    ];

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim() {
            "alpha" => self.alpha = parse(key, value)?,
            "burn_in_epochs" => self.burn_in_epochs = parse(key, value)?,
            "max_epochs" => self.max_epochs = parse(key, value)?,
            "learning_rate" => self.learning_rate = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "batch_size" => self.batch_size = parse(key, value)?,
            "steps_per_epoch" => self.steps_per_epoch = parse_opt(key, value)?,
            "reference_network" => self.toggles.reference_network = parse_bool(key, value)?,
            "teacher_memory" => self.toggles.teacher_memory = parse_bool(key, value)?,
            "reference_memory" => self.toggles.reference_memory = parse_bool(key, value)?,
            "signed_relative_target" => self.signed_relative_target = parse_bool(key, value)?,
            "augment_noise_std" => self.augment_noise_std = parse(key, value)?,
            "flip_probability" => self.flip_probability = parse(key, value)?,
            "adam_beta1" => self.adam_beta1 = parse(key, value)?,
            "adam_beta2" => self.adam_beta2 = parse(key, value)?,
            "adam_epsilon" => self.adam_epsilon = parse(key, value)?,
            "beta_peak" => self.beta_schedule.peak = parse(key, value)?,
            "beta_sharpness" => self.beta_schedule.sharpness = parse(key, value)?,
            "beta_horizon" => self.beta_schedule.horizon = parse(key, value)?,
            "mixer_layers" => self.mixer_layers = parse_opt(key, value)?,
            "token_hidden" => self.token_hidden = parse_opt(key, value)?,
            "channel_hidden" => self.channel_hidden = parse_opt(key, value)?,
            "attn_dim" => self.attn_dim = parse_opt(key, value)?,
            "ref_mlp_hidden" => self.ref_mlp_hidden = parse_opt(key, value)?,
            "attn_blocks" => self.attn_blocks = parse_opt(key, value)?,
            other => return Err(Error::config(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    /// Applies a flat `key = value` text; `#` starts a comment.
    pub fn apply_kv_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::config(format!("line {}: expected key=value", n + 1)))?;
            self.set(k, v)
                .map_err(|e| Error::config(format!("line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn from_kv_text(text: &str) -> Result<Self> {
        let mut c = Self::default();
        c.apply_kv_text(text)?;
        Ok(c)
    }

    pub fn to_kv_text(&self) -> String {
        let s = &self.beta_schedule;
        let t = &self.toggles;
        let rows: Vec<(&str, String)> = vec![
            ("alpha", self.alpha.to_string()),
            ("burn_in_epochs", self.burn_in_epochs.to_string()),
            ("max_epochs", self.max_epochs.to_string()),
            ("learning_rate", self.learning_rate.to_string()),
            ("seed", self.seed.to_string()),
            ("batch_size", self.batch_size.to_string()),
            ("steps_per_epoch", opt_str(self.steps_per_epoch)),
            ("reference_network", t.reference_network.to_string()),
            ("teacher_memory", t.teacher_memory.to_string()),
            ("reference_memory", t.reference_memory.to_string()),
            ("signed_relative_target", self.signed_relative_target.to_string()),
            ("augment_noise_std", self.augment_noise_std.to_string()),
            ("flip_probability", self.flip_probability.to_string()),
            ("adam_beta1", self.adam_beta1.to_string()),
            ("adam_beta2", self.adam_beta2.to_string()),
            ("adam_epsilon", self.adam_epsilon.to_string()),
            ("beta_peak", s.peak.to_string()),
            ("beta_sharpness", s.sharpness.to_string()),
            ("beta_horizon", s.horizon.to_string()),
            ("mixer_layers", opt_str(self.mixer_layers)),
            ("token_hidden", opt_str(self.token_hidden)),
            ("channel_hidden", opt_str(self.channel_hidden)),
            ("attn_dim", opt_str(self.attn_dim)),
            ("ref_mlp_hidden", opt_str(self.ref_mlp_hidden)),
            ("attn_blocks", opt_str(self.attn_blocks)),
        ];
        rows.into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::config(format!("alpha must be in (0,1), got {}", self.alpha)));
        }
        if self.burn_in_epochs == 0 {
            return Err(Error::config("burn_in_epochs must be at least 1"));
        }
        if self.burn_in_epochs >= self.max_epochs {
            return Err(Error::config(format!(
                "burn_in_epochs ({}) must be below max_epochs ({})",
                self.burn_in_epochs, self.max_epochs
            )));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::config("learning_rate must be positive"));
        }
        if self.batch_size == 0 {
            return Err(Error::config("batch_size must be at least 1"));
        }
        if self.steps_per_epoch == Some(0) {
            return Err(Error::config("steps_per_epoch must be at least 1"));
        }
        if !(self.augment_noise_std >= 0.0) {
            return Err(Error::config("augment_noise_std must be non-negative"));
        }
        if !(0.0..=1.0).contains(&self.flip_probability) {
            return Err(Error::config("flip_probability must be in [0,1]"));
        }
        if !(0.0..1.0).contains(&self.adam_beta1) || !(0.0..1.0).contains(&self.adam_beta2) {
            return Err(Error::config("adam betas must be in [0,1)"));
        }
        if !(self.adam_epsilon > 0.0) {
            return Err(Error::config("adam_epsilon must be positive"));
        }
        if !(self.beta_schedule.peak >= 0.0 && self.beta_schedule.horizon > 0.0) {
            return Err(Error::config("beta schedule needs peak >= 0 and horizon > 0"));
        }
        Ok(())
    }

    /// Architecture for `T × D` inputs with this config's overrides.
    pub fn network(&self, seq_len: usize, feat_dim: usize) -> NetworkConfig {
        let mut n = NetworkConfig::new(seq_len, feat_dim);
        if let Some(v) = self.mixer_layers {
            n.mixer_layers = v;
        }
        if let Some(v) = self.token_hidden {
            n.token_hidden = v;
        }
        if let Some(v) = self.channel_hidden {
            n.channel_hidden = v;
        }
        if let Some(v) = self.attn_dim {
            n.attn_dim = v;
        }
        if let Some(v) = self.ref_mlp_hidden {
            n.ref_mlp_hidden = v;
        }
        if let Some(v) = self.attn_blocks {
            n.attn_blocks = v;
        }
        n
    }
}
