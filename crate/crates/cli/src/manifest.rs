//! Simulation manifest: one JSON object per line with `source`, `rir`,
//! `noise`, `snr_db` and optional `seed` and `id`. Blank lines and lines
//! starting with `#` are skipped. Relative paths resolve against the
//! manifest's directory.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use anyhow::{bail, Result};
use serde::Deserialize;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct Line {
    id: Option<String>,
    source: String,
    rir: String,
    noise: String,
    snr_db: f64,
    seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub line: usize,
    pub index: usize,
    pub id: String,
    pub source: String,
    pub rir: String,
    pub noise: String,
    pub snr_db: f64,
    pub seed: Option<u64>,
}

pub fn resolve(base: &Path, field: &str) -> PathBuf {
    let p = Path::new(field);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

pub fn valid_id(id: &str) -> bool {
    !id.is_empty()
        && id != "."
        && id != ".."
        && id.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

pub fn default_id(index: usize) -> String {
    format!("utt{index:05}")
}

pub fn parse(text: &str) -> Result<Vec<Entry>> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let l: Line = match serde_json::from_str(content) {
            Ok(l) => l,
            Err(e) => bail!("manifest line {line}: {e}"),
        };
        let index = out.len();
        let id = l.id.unwrap_or_else(|| default_id(index));
        if !valid_id(&id) {
            bail!("manifest line {line}: invalid utterance id `{id}`");
        }
        if !seen.insert(id.clone()) {
            bail!("manifest line {line}: duplicate utterance id `{id}`");
        }
        if !l.snr_db.is_finite() {
            bail!("manifest line {line}: snr_db must be finite");
        }
        out.push(Entry {
            line,
            index,
            id,
            source: l.source,
            rir: l.rir,
            noise: l.noise,
            snr_db: l.snr_db,
            seed: l.seed,
        });
    }
    Ok(out)
}
