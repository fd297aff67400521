//! Confidence memories: per-sample stores of the lowest-sigma prediction
//! seen so far, and pseudo-label fusion.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MemoryKind {
    /// Stores the teacher's absolute score.
    Teacher,
    /// Stores `s_l + Δs` from the reference network.
    Reference,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemoryEntry {
    pub score: f64,
    pub sigma: f64,
    pub epoch_written: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WriteOutcome {
    Written,
    Kept,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConfidenceMemory {
    kind: MemoryKind,
    entries: BTreeMap<String, MemoryEntry>,
}

impl ConfidenceMemory {
    pub fn new(kind: MemoryKind) -> Self {
        Self {
            kind,
            entries: BTreeMap::new(),
        }
    }

    pub fn kind(&self) -> MemoryKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &MemoryEntry)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn clear(&mut self) {
        self.entries.clear();
    }

    /// Stores `(score, sigma)` if `id` is new or `sigma` is strictly below
    /// the stored sigma. Ties keep the existing entry.
    pub fn maybe_write(&mut self, id: &str, score: f64, sigma: f64, epoch: u64) -> Result<WriteOutcome> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::contract(format!("memory sigma must be positive, got {sigma}")));
        }
        if !score.is_finite() {
            return Err(Error::contract(format!("memory score must be finite, got {score}")));
        }
        let fresh = MemoryEntry {
            score,
            sigma,
            epoch_written: epoch,
        };
        match self.entries.get_mut(id) {
            None => {
                self.entries.insert(id.to_owned(), fresh);
                Ok(WriteOutcome::Written)
            }
            Some(entry) if sigma < entry.sigma => {
                *entry = fresh;
                Ok(WriteOutcome::Written)
            }
            Some(_) => Ok(WriteOutcome::Kept),
        }
    }

    pub fn read(&self, id: &str) -> Option<&MemoryEntry> {
        self.entries.get(id)
    }

    /// One `id\tscore\tsigma\tepoch` line per entry, sorted by id, floats
    /// with 17 significant digits.
    pub fn to_tsv(&self) -> Result<String> {
        let mut out = String::new();
        for (id, e) in &self.entries {
            if id.contains(['\t', '\n', '\r']) {
                return Err(Error::contract(format!("sample id {id:?} cannot be stored as TSV")));
            }
            writeln!(out, "{id}\t{:.16e}\t{:.16e}\t{}", e.score, e.sigma, e.epoch_written)
                .expect("write to string");
        }
        Ok(out)
    }

    pub fn from_tsv(kind: MemoryKind, text: &str) -> Result<Self> {
        let mut mem = Self::new(kind);
        let mut offset = 0;
        for line in text.split_inclusive('\n') {
            let body = line.trim_end_matches(['\n', '\r']);
            if !body.is_empty() {
                let fields: Vec<&str> = body.split('\t').collect();
                let [id, score, sigma, epoch] = fields[..] else {
                    return Err(Error::parse(offset, "expected 4 tab-separated fields"));
                };
                let num = |s: &str| {
                    s.parse::<f64>()
                        .map_err(|_| Error::parse(offset, format!("bad number {s:?}")))
                };
                let epoch = epoch
                    .parse::<u64>()
                    .map_err(|_| Error::parse(offset, format!("bad epoch {epoch:?}")))?;
                let entry = MemoryEntry {
                    score: num(score)?,
                    sigma: num(sigma)?,
                    epoch_written: epoch,
                };
                if !(entry.sigma > 0.0) {
                    return Err(Error::parse(offset, "non-positive sigma"));
                }
                if mem.entries.insert(id.to_owned(), entry).is_some() {
                    return Err(Error::parse(offset, format!("duplicate id {id:?}")));
                }
            }
            offset += line.len();
        }
        Ok(mem)
    }
}

/// Final pseudo-label: the mean of the teacher-memory and reference-memory
/// scores. `None` when either entry is missing.
pub fn fuse_pseudo_label(teacher: Option<&MemoryEntry>, reference: Option<&MemoryEntry>) -> Option<f64> {
    Some(fuse_scores(teacher?.score, reference?.score))
}

pub fn fuse_scores(a: f64, b: f64) -> f64 {
    (a + b) / 2.0
}
