//! AQAF: little-endian binary container for feature-sequence datasets.
//!
//! ```text
//! "AQAF"  u32 version (=1)  u32 sample_count
//! per sample:
//!   u16 id_len, id bytes (UTF-8)
//!   u8 has_score, [f64 score]
//!   u32 T, u32 D, T·D f64 features (row-major)
//! ```

use std::fs;
use std::path::Path;

use super::{Dataset, FeatureSequence};
use crate::autodiff::Tensor;
use crate::error::{Error, Result};

pub const AQAF_MAGIC: &[u8; 4] = b"AQAF";
pub const AQAF_VERSION: u32 = 1;

pub fn encode(dataset: &Dataset) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    out.extend_from_slice(AQAF_MAGIC);
    out.extend_from_slice(&AQAF_VERSION.to_le_bytes());
    let count = u32::try_from(dataset.len())
        .map_err(|_| Error::contract("too many samples for AQAF"))?;
    out.extend_from_slice(&count.to_le_bytes());
    for s in dataset.samples() {
        let id = s.sample_id.as_bytes();
        let id_len = u16::try_from(id.len())
            .map_err(|_| Error::contract(format!("sample id too long: {} bytes", id.len())))?;
        out.extend_from_slice(&id_len.to_le_bytes());
        out.extend_from_slice(id);
        match s.score {
            Some(v) => {
                out.push(1);
                out.extend_from_slice(&v.to_le_bytes());
            }
            None => out.push(0),
        }
        out.extend_from_slice(&(s.seq_len() as u32).to_le_bytes());
        out.extend_from_slice(&(s.feat_dim() as u32).to_le_bytes());
        for v in s.features.data() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(Error::parse(
                self.pos,
                format!("truncated {what}: need {n} bytes, {} left", self.buf.len() - self.pos),
            ));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn u16(&mut self, what: &str) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2, what)?.try_into().unwrap()))
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
}

pub fn decode(bytes: &[u8]) -> Result<Dataset> {
    let mut c = Cursor { buf: bytes, pos: 0 };
    let magic = c.take(4, "magic")?;
    if magic != AQAF_MAGIC {
        return Err(Error::parse(0, format!("bad magic {:?}", String::from_utf8_lossy(magic))));
    }
    let version = c.u32("version")?;
    if version != AQAF_VERSION {
        return Err(Error::parse(4, format!("unsupported version {version}")));
    }
    let count = c.u32("sample count")?;
    let mut samples = Vec::new();
    let mut shape: Option<(u32, u32)> = None;
    let mut ids = std::collections::HashSet::new();
    for _ in 0..count {
        let id_at = c.pos;
        let id_len = c.u16("id length")? as usize;
        let id = std::str::from_utf8(c.take(id_len, "id")?)
            .map_err(|_| Error::parse(id_at + 2, "sample id is not UTF-8"))?
            .to_owned();
        if !ids.insert(id.clone()) {
            return Err(Error::parse(id_at, format!("duplicate sample id {id:?}")));
        }
        let flag_at = c.pos;
        let score = match c.u8("score flag")? {
            0 => None,
            1 => Some(c.f64("score")?),
            other => return Err(Error::parse(flag_at, format!("bad score flag {other}"))),
        };
        let dims_at = c.pos;
        let t = c.u32("T")?;
        let d = c.u32("D")?;
        if t == 0 || d == 0 {
            return Err(Error::parse(dims_at, format!("empty feature shape {t}x{d}")));
        }
        match shape {
            None => shape = Some((t, d)),
            Some(s) if s != (t, d) => {
                return Err(Error::parse(
                    dims_at,
                    format!("shape {t}x{d} differs from {}x{}", s.0, s.1),
                ))
            }
            _ => {}
        }
        let n = (t as usize)
            .checked_mul(d as usize)
            .ok_or_else(|| Error::parse(dims_at, "feature shape overflows"))?;
        if (bytes.len() - c.pos) / 8 < n {
            return Err(Error::parse(c.pos, format!("truncated features: need {n} values")));
        }
        let mut data = Vec::with_capacity(n);
        for _ in 0..n {
            data.push(c.f64("feature")?);
        }
        let features = Tensor::new(vec![t as usize, d as usize], data)?;
        samples.push(FeatureSequence::new(id, features, score)?);
    }
    if c.pos != bytes.len() {
        return Err(Error::parse(c.pos, format!("{} trailing bytes", bytes.len() - c.pos)));
    }
    Dataset::new(samples)
}

pub fn save_features(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode(dataset)?)?;
    Ok(())
}

pub fn load_features(path: impl AsRef<Path>) -> Result<Dataset> {
    decode(&fs::read(path)?)
}
