use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use serde_json::{json, Map, Value};
use wpekit::features::{l1_loss, l2_loss, log_spectral_distance, ncs_loss, residual_reverb_snr, toy_embedding, LossWeights};
use wpekit::signal::{load_wav, stft, StftConfig, TimeSignal};

use super::{emit, jsonl, par_try_map};
use crate::config::{self, stft_json, weights_json, FileConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Metric {
    Lsd,
    Snr,
    L1,
    L2,
    Ncs,
}

impl Metric {
    fn name(self) -> &'static str {
        match self {
            Metric::Lsd => "lsd",
            Metric::Snr => "snr",
            Metric::L1 => "l1",
            Metric::L2 => "l2",
            Metric::Ncs => "ncs",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Target {
    #[value(name = "early_clean")]
    EarlyClean,
    #[value(name = "early_noisy")]
    EarlyNoisy,
}

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Output directory of `simulate`.
    #[arg(long)]
    references: PathBuf,
    /// Directory of processed WAVs named like the observed references.
    #[arg(long)]
    processed: PathBuf,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Metric::Lsd, Metric::Snr, Metric::L1, Metric::L2, Metric::Ncs])]
    metrics: Vec<Metric>,
    /// Reference for the l1, l2 and ncs metrics.
    #[arg(long, value_enum, default_value_t = Target::EarlyClean)]
    target: Target,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
struct Files {
    observed: String,
    early_clean: String,
    early_noisy: String,
}

#[derive(Debug, Deserialize)]
struct Record {
    id: String,
    index: usize,
    files: Files,
}

fn load_records(dir: &Path) -> Result<Vec<Record>> {
    let mut records = Vec::new();
    let entries = fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))?;
    for entry in entries {
        let path = entry?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("json") {
            continue;
        }
        let text = fs::read_to_string(&path)?;
        let r: Record = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        records.push(r);
    }
    records.sort_by(|a, b| a.index.cmp(&b.index).then_with(|| a.id.cmp(&b.id)));
    Ok(records)
}

struct Setup {
    metrics: Vec<Metric>,
    target: Target,
    stft: StftConfig,
    pretrain: LossWeights,
    finetune: LossWeights,
}

struct Signals {
    observed: TimeSignal,
    processed: TimeSignal,
    early_clean: TimeSignal,
    early_noisy: TimeSignal,
}

fn load_signals(rec: &Record, refs: &Path, processed: &Path) -> Result<Signals> {
    let load = |p: PathBuf| load_wav(&p).with_context(|| format!("reading {}", p.display()));
    let mut s = Signals {
        observed: load(refs.join(&rec.files.observed))?,
        processed: load(processed.join(&rec.files.observed))?,
        early_clean: load(refs.join(&rec.files.early_clean))?,
        early_noisy: load(refs.join(&rec.files.early_noisy))?,
    };
    if s.processed.len() != s.observed.len() {
        bail!(
            "utterance `{}`: processed length {} does not match reference length {}",
            rec.id,
            s.processed.len(),
            s.observed.len()
        );
    }
    if s.processed.sample_rate() != s.observed.sample_rate() {
        bail!("utterance `{}`: processed and reference sample rates differ", rec.id);
    }
    let (pc, rc) = (s.processed.num_channels(), s.observed.num_channels());
    if pc != rc {
        if pc != 1 {
            bail!("utterance `{}`: processed has {pc} channels, reference has {rc}", rec.id);
        }
        s.observed = s.observed.select(0);
        s.early_clean = s.early_clean.select(0);
        s.early_noisy = s.early_noisy.select(0);
    }
    Ok(s)
}

fn row(s: &Signals, setup: &Setup) -> Result<Map<String, Value>> {
    let mut m = Map::new();
    let target = match setup.target {
        Target::EarlyClean => &s.early_clean,
        Target::EarlyNoisy => &s.early_noisy,
    };
    let spec = |x: &TimeSignal| stft(x, &setup.stft);
    for metric in &setup.metrics {
        match metric {
            Metric::Lsd => {
                let r = spec(&s.early_clean)?;
                m.insert("lsd_in".into(), json!(log_spectral_distance(&spec(&s.observed)?, &r)?));
                m.insert("lsd_out".into(), json!(log_spectral_distance(&spec(&s.processed)?, &r)?));
            }
            Metric::Snr => {
                m.insert("snr_in".into(), json!(residual_reverb_snr(&s.observed, &s.early_noisy)?));
                m.insert("snr_out".into(), json!(residual_reverb_snr(&s.processed, &s.early_noisy)?));
            }
            Metric::L1 => {
                let v = l1_loss(&spec(&s.processed)?, &spec(target)?, &s.processed, target, &setup.pretrain)?;
                m.insert("l1".into(), json!(v));
            }
            Metric::L2 => {
                let (p, t) = (s.processed.select(0), target.select(0));
                let v = l2_loss(&spec(&p)?, &spec(&t)?, &p, &t, &setup.finetune)?;
                m.insert("l2".into(), json!(v));
            }
            Metric::Ncs => {
                let v = ncs_loss(&toy_embedding(&s.processed.select(0))?, &toy_embedding(&target.select(0))?)?;
                m.insert("ncs".into(), json!(v));
            }
        }
    }
    Ok(m)
}

pub fn run(args: Args, file: &FileConfig) -> Result<()> {
    let mut metrics = Vec::new();
    for m in &args.metrics {
        if !metrics.contains(m) {
            metrics.push(*m);
        }
    }
    let setup = Setup {
        metrics,
        target: args.target,
        stft: config::stft_config(&file.stft, StftConfig::dereverb())?,
        pretrain: config::weights(&file.loss.pretrain, LossWeights::pretrain())?,
        finetune: config::weights(&file.loss.finetune, LossWeights::finetune())?,
    };
    if !args.processed.is_dir() {
        bail!("processed directory `{}` does not exist", args.processed.display());
    }
    let records = load_records(&args.references)?;

    let rows = par_try_map(&records, |rec| {
        let s = load_signals(rec, &args.references, &args.processed)?;
        row(&s, &setup).with_context(|| format!("evaluating utterance `{}`", rec.id))
    })?;

    let mut lines = vec![json!({
        "type": "config",
        "metrics": setup.metrics.iter().map(|m| m.name()).collect::<Vec<_>>(),
        "target": match setup.target { Target::EarlyClean => "early_clean", Target::EarlyNoisy => "early_noisy" },
        "stft": stft_json(&setup.stft),
        "loss": { "pretrain": weights_json(&setup.pretrain), "finetune": weights_json(&setup.finetune) },
    })];
    let mut sums: Vec<(String, f64)> = Vec::new();
    for (rec, values) in records.iter().zip(&rows) {
        let mut line = Map::new();
        line.insert("type".into(), json!("utterance"));
        line.insert("id".into(), json!(rec.id));
        for (k, v) in values {
            let x = v.as_f64().unwrap_or(f64::NAN);
            match sums.iter_mut().find(|(name, _)| name == k) {
                Some((_, s)) => *s += x,
                None => sums.push((k.clone(), x)),
            }
            line.insert(k.clone(), v.clone());
        }
        lines.push(Value::Object(line));
    }
    let mut agg = Map::new();
    agg.insert("type".into(), json!("aggregate"));
    agg.insert("count".into(), json!(rows.len()));
    for (k, s) in sums {
        agg.insert(k, json!(s / rows.len() as f64));
    }
    lines.push(Value::Object(agg));
    emit(args.out.as_deref(), &jsonl(&lines))
}
