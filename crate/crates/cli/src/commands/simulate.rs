use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use serde_json::{json, Value};
use wpekit::room::{simulate, split_rir, ObservationSet, DEFAULT_EARLY_BOUNDARY_MS};
use wpekit::signal::{load_wav, save_wav, BitDepth};

use super::{create_dir, parent_dir, par_try_map, require_file, utterance_seed, write_file};
use crate::config::FileConfig;
use crate::manifest::{self, resolve, Entry};

pub const COMPONENTS: [&str; 5] = ["observed", "early_clean", "early_noisy", "late", "noise"];

#[derive(Debug, clap::Args)]
pub struct Args {
    /// JSON-lines manifest.
    manifest: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    /// Run seed; per-utterance seeds not given in the manifest derive from it.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    early_boundary_ms: Option<f64>,
}

struct Rendered {
    seed: u64,
    obs: ObservationSet,
    rir: Value,
}

fn component<'a>(obs: &'a ObservationSet, name: &str) -> &'a wpekit::signal::TimeSignal {
    match name {
        "observed" => &obs.observed,
        "early_clean" => &obs.early_clean,
        "early_noisy" => &obs.early_noisy,
        "late" => &obs.late,
        "noise" => &obs.noise,
        _ => unreachable!("unknown component {name}"),
    }
}

fn render(e: &Entry, base: &std::path::Path, run_seed: u64, boundary_ms: f64) -> Result<Rendered> {
    let ctx = || format!("utterance `{}` (manifest line {})", e.id, e.line);
    let seed = e.seed.unwrap_or_else(|| utterance_seed(run_seed, e.index));
    let source = load_wav(resolve(base, &e.source)).with_context(ctx)?;
    if source.num_channels() != 1 {
        bail!("{}: source must be mono, found {} channels", ctx(), source.num_channels());
    }
    let rir = load_wav(resolve(base, &e.rir)).with_context(ctx)?;
    let noise = load_wav(resolve(base, &e.noise)).with_context(ctx)?;
    let split = split_rir(&rir, boundary_ms).with_context(ctx)?;
    let obs = simulate(&source, &split.bundle, &noise, e.snr_db, seed).with_context(ctx)?;
    let b = &split.bundle;
    let rir_stats = json!({
        "length": b.impulse_response.len(),
        "channels": b.impulse_response.num_channels(),
        "main_peak_index": b.main_peak_index,
        "early_boundary": b.early_boundary,
        "split_index": b.split_index(),
        "early_energy": split.early_rir.energy(),
        "late_energy": split.late_rir.energy(),
    });
    Ok(Rendered { seed, obs, rir: rir_stats })
}

pub fn run(args: Args, file: &FileConfig) -> Result<()> {
    let run_seed = args.seed.or(file.seed).unwrap_or(0);
    let boundary_ms = args
        .early_boundary_ms
        .or(file.simulate.early_boundary_ms)
        .unwrap_or(DEFAULT_EARLY_BOUNDARY_MS);
    if !(boundary_ms >= 0.0 && boundary_ms.is_finite()) {
        bail!("early boundary must be a non-negative number of milliseconds");
    }
    let text = fs::read_to_string(&args.manifest)
        .with_context(|| format!("reading manifest {}", args.manifest.display()))?;
    let entries = manifest::parse(&text)?;
    let base = parent_dir(&args.manifest);
    for e in &entries {
        for (what, p) in [("source", &e.source), ("rir", &e.rir), ("noise", &e.noise)] {
            require_file(&resolve(&base, p), what).with_context(|| format!("manifest line {}", e.line))?;
        }
    }

    let rendered = par_try_map(&entries, |e| render(e, &base, run_seed, boundary_ms))?;

    create_dir(&args.out_dir)?;
    for (e, r) in entries.iter().zip(&rendered) {
        let mut files = serde_json::Map::new();
        for name in COMPONENTS {
            let fname = format!("{}.{name}.wav", e.id);
            save_wav(component(&r.obs, name), args.out_dir.join(&fname), BitDepth::Float32)?;
            files.insert(name.to_string(), Value::String(fname));
        }
        let record = json!({
            "id": e.id,
            "index": e.index,
            "seed": r.seed,
            "snr_db_target": e.snr_db,
            "snr_db": r.obs.snr_db,
            "sample_rate": r.obs.observed.sample_rate(),
            "length": r.obs.observed.len(),
            "channels": r.obs.observed.num_channels(),
            "source": e.source,
            "rir": e.rir,
            "noise": e.noise,
            "rir_stats": r.rir,
            "files": files,
            "config": { "early_boundary_ms": boundary_ms, "run_seed": run_seed },
        });
        let mut text = serde_json::to_string(&record)?;
        text.push('\n');
        write_file(&args.out_dir.join(format!("{}.json", e.id)), text.as_bytes())?;
    }
    Ok(())
}
