//! Checkpoint directories.
//!
//! ```text
//! params_t.bin  params_s.bin  params_f.bin     parameter sets
//! optim_t.bin   optim_s.bin   optim_f.bin      Adam moments
//! memory_t.tsv  memory_r.tsv                   confidence memories
//! state.json                                   epoch, stage, rng, config
//! metrics.csv                                  log so far
//! ```
//!
//! Parameter files: `"TRSP"`, u32 version, u32 count, a name table of
//! (u16 name length, name, u32 ndim, u32 dims...), then every tensor's
//! values as little-endian f64 in table order.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::TrainConfig;
use super::optim::Adam;
use super::trainer::{metrics_csv_string, parse_metrics_csv, EpochMetrics, Stage, TrsState};
use crate::autodiff::Tensor;
use crate::error::{Error, Result};
use crate::memory::{ConfidenceMemory, MemoryKind};
use crate::networks::NetworkConfig;
use crate::params::ParamSet;

pub const PARAMS_MAGIC: &[u8; 4] = b"TRSP";
pub const PARAMS_VERSION: u32 = 1;

pub fn encode_params(params: &ParamSet) -> Result<Vec<u8>> {
    let mut out = PARAMS_MAGIC.to_vec();
    out.extend(PARAMS_VERSION.to_le_bytes());
    out.extend((params.len() as u32).to_le_bytes());
    for p in params.iter() {
        let name = p.name.as_bytes();
        let len = u16::try_from(name.len())
            .map_err(|_| Error::contract(format!("parameter name too long: {}", p.name)))?;
        out.extend(len.to_le_bytes());
        out.extend(name);
        out.extend((p.tensor.ndim() as u32).to_le_bytes());
        for &d in p.tensor.shape() {
            out.extend((d as u32).to_le_bytes());
        }
    }
    for p in params.iter() {
        for v in p.tensor.data() {
            out.extend(v.to_le_bytes());
        }
    }
    Ok(out)
}

fn take<'a>(buf: &'a [u8], pos: &mut usize, n: usize) -> Result<&'a [u8]> {
    if buf.len() - *pos < n {
        return Err(Error::parse(*pos, "truncated parameter file"));
    }
    let s = &buf[*pos..*pos + n];
    *pos += n;
    Ok(s)
}

fn read_u32(buf: &[u8], pos: &mut usize) -> Result<u32> {
    Ok(u32::from_le_bytes(take(buf, pos, 4)?.try_into().unwrap()))
}

pub fn decode_params(buf: &[u8]) -> Result<ParamSet> {
    let mut pos = 0;
    if take(buf, &mut pos, 4)? != PARAMS_MAGIC {
        return Err(Error::parse(0, "bad parameter file magic"));
    }
    if read_u32(buf, &mut pos)? != PARAMS_VERSION {
        return Err(Error::parse(4, "unsupported parameter file version"));
    }
    let count = read_u32(buf, &mut pos)?;
    let mut table = Vec::new();
    for _ in 0..count {
        let at = pos;
        let len = u16::from_le_bytes(take(buf, &mut pos, 2)?.try_into().unwrap()) as usize;
        let name = std::str::from_utf8(take(buf, &mut pos, len)?)
            .map_err(|_| Error::parse(at, "parameter name is not UTF-8"))?
            .to_owned();
        let ndim = read_u32(buf, &mut pos)? as usize;
        let mut shape = Vec::with_capacity(ndim);
        for _ in 0..ndim {
            shape.push(read_u32(buf, &mut pos)? as usize);
        }
        table.push((name, shape));
    }
    let mut out = ParamSet::new();
    for (name, shape) in table {
        let n: usize = shape.iter().product();
        let at = pos;
        let bytes = take(buf, &mut pos, n.checked_mul(8).ok_or_else(|| Error::parse(at, "shape overflow"))?)?;
        let data = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let t = Tensor::new(shape, data).map_err(|e| Error::parse(at, e.to_string()))?;
        out.insert(name, t).map_err(|e| Error::parse(at, e.to_string()))?;
    }
    if pos != buf.len() {
        return Err(Error::parse(pos, "trailing bytes in parameter file"));
    }
    Ok(out)
}

pub fn save_params(params: &ParamSet, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_params(params)?)?;
    Ok(())
}

pub fn load_params(path: impl AsRef<Path>) -> Result<ParamSet> {
    decode_params(&fs::read(path)?)
}

#[derive(Serialize, Deserialize)]
struct RngState {
    seed: u64,
    /// Every stream is derived from the seed and the epoch index, so the
    /// next epoch fully determines the generator state.
    next_epoch: usize,
}

#[derive(Serialize, Deserialize)]
struct StateFile {
    epoch: usize,
    stage: Stage,
    rng_state: RngState,
    config: TrainConfig,
    network: NetworkConfig,
}

fn adam_for(state: &ParamSet, params: &ParamSet, cfg: &TrainConfig) -> Result<Adam> {
    Adam::from_param_set(
        state,
        params,
        cfg.learning_rate,
        cfg.adam_beta1,
        cfg.adam_beta2,
        cfg.adam_epsilon,
    )
}

/// Writes the full training state and the metrics log to `dir`.
pub fn save_checkpoint(dir: impl AsRef<Path>, state: &TrsState, metrics: &[EpochMetrics]) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    save_params(&state.theta_t, dir.join("params_t.bin"))?;
    save_params(&state.opt_t.to_param_set(&state.theta_t)?, dir.join("optim_t.bin"))?;
    for (tag, params, opt) in [
        ("s", &state.theta_s, &state.opt_s),
        ("f", &state.theta_f, &state.opt_f),
    ] {
        let pfile = dir.join(format!("params_{tag}.bin"));
        let ofile = dir.join(format!("optim_{tag}.bin"));
        match (params, opt) {
            (Some(p), Some(o)) => {
                save_params(p, pfile)?;
                save_params(&o.to_param_set(p)?, ofile)?;
            }
            _ => {
                for f in [pfile, ofile] {
                    if f.exists() {
                        fs::remove_file(f)?;
                    }
                }
            }
        }
    }
    fs::write(dir.join("memory_t.tsv"), state.m_t.to_tsv()?)?;
    fs::write(dir.join("memory_r.tsv"), state.m_r.to_tsv()?)?;
    let file = StateFile {
        epoch: state.epoch,
        stage: state.stage,
        rng_state: RngState {
            seed: state.config.seed,
            next_epoch: state.epoch,
        },
        config: state.config.clone(),
        network: state.network.clone(),
    };
    let json = serde_json::to_string_pretty(&file).map_err(|e| Error::contract(e.to_string()))?;
    fs::write(dir.join("state.json"), json)?;
    fs::write(dir.join("metrics.csv"), metrics_csv_string(metrics))?;
    Ok(())
}

/// Reads back what [`save_checkpoint`] wrote.
pub fn load_checkpoint(dir: impl AsRef<Path>) -> Result<(TrsState, Vec<EpochMetrics>)> {
    let dir = dir.as_ref();
    let file: StateFile = serde_json::from_str(&fs::read_to_string(dir.join("state.json"))?)
        .map_err(|e| Error::config(format!("state.json: {e}")))?;
    let cfg = file.config;
    cfg.validate()?;
    let theta_t = load_params(dir.join("params_t.bin"))?;
    let opt_t = adam_for(&load_params(dir.join("optim_t.bin"))?, &theta_t, &cfg)?;
    let load_pair = |tag: &str| -> Result<(Option<ParamSet>, Option<Adam>)> {
        let pfile = dir.join(format!("params_{tag}.bin"));
        if !pfile.exists() {
            return Ok((None, None));
        }
        let p = load_params(pfile)?;
        let o = adam_for(&load_params(dir.join(format!("optim_{tag}.bin")))?, &p, &cfg)?;
        Ok((Some(p), Some(o)))
    };
    let (theta_s, opt_s) = load_pair("s")?;
    let (theta_f, opt_f) = load_pair("f")?;
    if (file.stage == Stage::Trs) != theta_s.is_some() {
        return Err(Error::contract("checkpoint stage disagrees with the stored student"));
    }
    if cfg.toggles.reference_network != theta_f.is_some() {
        return Err(Error::contract("checkpoint reference network disagrees with the config"));
    }
    let m_t = ConfidenceMemory::from_tsv(MemoryKind::Teacher, &fs::read_to_string(dir.join("memory_t.tsv"))?)?;
    let m_r = ConfidenceMemory::from_tsv(MemoryKind::Reference, &fs::read_to_string(dir.join("memory_r.tsv"))?)?;
    let metrics = parse_metrics_csv(&fs::read_to_string(dir.join("metrics.csv"))?)?;
    let state = TrsState {
        config: cfg,
        network: file.network,
        theta_t,
        theta_s,
        theta_f,
        opt_t,
        opt_s,
        opt_f,
        epoch: file.epoch,
        stage: file.stage,
        m_t,
        m_r,
    };
    Ok((state, metrics))
}
