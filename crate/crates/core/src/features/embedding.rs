use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use ndarray::Axis;

use super::{log_mfbe, swms, DEFAULT_BANDS, DEFAULT_SWMS_SECONDS};
use crate::signal::{stft, StftConfig, TimeSignal};
use crate::{Error, Result};

/// Dimension of [`toy_embedding`] vectors.
pub const EMBEDDING_DIM: usize = 2 * DEFAULT_BANDS;

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector {
    values: Vec<f64>,
    norm: f64,
}

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::format("embedding values must be finite"));
        }
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        Ok(Self { values, norm })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }
}

/// Maps a waveform to a speaker embedding.
pub trait EmbeddingProvider: Sync {
    fn embed(&self, signal: &TimeSignal) -> Result<EmbeddingVector>;
}

/// Per-band mean and standard deviation of mean-subtracted log mel
/// energies. Deterministic and training-free.
#[derive(Debug, Clone, Copy, Default)]
pub struct ToyEmbedder;

impl EmbeddingProvider for ToyEmbedder {
    fn embed(&self, signal: &TimeSignal) -> Result<EmbeddingVector> {
        toy_embedding(signal)
    }
}

pub fn toy_embedding(signal: &TimeSignal) -> Result<EmbeddingVector> {
    if signal.num_channels() != 1 {
        return Err(Error::config("embeddings are computed from mono signals"));
    }
    if signal.energy() == 0.0 {
        return Err(Error::degenerate("cannot embed a silent signal"));
    }
    let spec = stft(signal, &StftConfig::features())?;
    let feats = swms(&log_mfbe(&spec, DEFAULT_BANDS)?, DEFAULT_SWMS_SECONDS)?;
    let v = feats.values();
    let mean = v.mean_axis(Axis(0)).expect("at least one frame");
    let std = v.std_axis(Axis(0), 0.0);
    EmbeddingVector::new(mean.iter().chain(std.iter()).copied().collect())
}

/// Parse an embedding table: a `dim=<N>` header, then one
/// `<id> <N values>` line per utterance. Blank text is an empty table.
pub fn parse_embeddings(text: &str) -> Result<BTreeMap<String, EmbeddingVector>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let mut table = BTreeMap::new();
    let Some((_, header)) = lines.next() else {
        return Ok(table);
    };
    let dim: usize = header
        .trim()
        .strip_prefix("dim=")
        .and_then(|d| d.parse().ok())
        .ok_or_else(|| Error::format(format!("expected `dim=<N>` header, found `{header}`")))?;
    for (no, line) in lines {
        let mut fields = line.split_whitespace();
        let id = fields.next().expect("non-blank line");
        let values = fields
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::format(format!("line {}: {e}", no + 1)))?;
        if values.len() != dim {
            return Err(Error::format(format!(
                "line {}: `{id}` has {} values, header says {dim}",
                no + 1,
                values.len()
            )));
        }
        let v = EmbeddingVector::new(values).map_err(|e| Error::format(format!("line {}: {e}", no + 1)))?;
        if table.insert(id.to_string(), v).is_some() {
            return Err(Error::format(format!("line {}: duplicate id `{id}`", no + 1)));
        }
    }
    Ok(table)
}

pub fn load_embeddings(path: impl AsRef<Path>) -> Result<BTreeMap<String, EmbeddingVector>> {
    parse_embeddings(&std::fs::read_to_string(path)?)
}

/// Serialise with shortest round-trip float formatting.
pub fn write_embeddings(table: &BTreeMap<String, EmbeddingVector>) -> Result<String> {
    let mut out = String::new();
    let Some(dim) = table.values().next().map(EmbeddingVector::dim) else {
        return Ok(out);
    };
    writeln!(out, "dim={dim}").unwrap();
    for (id, v) in table {
        if v.dim() != dim {
            return Err(Error::format(format!("`{id}` has dimension {}, expected {dim}", v.dim())));
        }
        if id.is_empty() || id.chars().any(char::is_whitespace) {
            return Err(Error::format(format!("invalid utterance id `{id}`")));
        }
        out.push_str(id);
        for x in v.values() {
            write!(out, " {x:?}").unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn save_embeddings(path: impl AsRef<Path>, table: &BTreeMap<String, EmbeddingVector>) -> Result<()> {
    std::fs::write(path, write_embeddings(table)?)?;
    Ok(())
}
