use std::path::PathBuf;

use anyhow::{bail, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use wpekit::room::sources::{babble_noise, speech_like, white_noise};
use wpekit::room::{RirGenerator, DEFAULT_TAIL_LEVEL};
use wpekit::signal::{save_wav, BitDepth};

use super::{create_dir, jsonl, par_try_map, write_file};
use crate::config::FileConfig;
use crate::manifest::default_id;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Directory receiving sources/, rirs/, noise/ and manifest.jsonl.
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 20)]
    count: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Utterance length in seconds.
    #[arg(long, default_value_t = 4.0)]
    duration: f64,
    #[arg(long, default_value_t = 300.0)]
    t60_min_ms: f64,
    #[arg(long, default_value_t = 900.0)]
    t60_max_ms: f64,
    #[arg(long, default_value_t = 3.0, allow_hyphen_values = true)]
    snr_min_db: f64,
    #[arg(long, default_value_t = 20.0, allow_hyphen_values = true)]
    snr_max_db: f64,
    #[arg(long, default_value_t = 1000.0)]
    rir_length_ms: f64,
    #[arg(long, default_value_t = 5.0)]
    direct_delay_ms: f64,
    #[arg(long, default_value_t = DEFAULT_TAIL_LEVEL)]
    tail_level: f64,
    /// Microphones per RIR.
    #[arg(long, default_value_t = 1)]
    channels: usize,
    #[arg(long, value_enum, default_value_t = NoiseKind::Babble)]
    noise: NoiseKind,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum NoiseKind {
    Babble,
    White,
}

struct Plan {
    id: String,
    t60_ms: f64,
    snr_db: f64,
    source_seed: u64,
    rir_seed: u64,
    noise_seed: u64,
    mix_seed: u64,
}

pub fn run(args: Args, file: &FileConfig) -> Result<()> {
    if !(args.duration > 0.0 && args.duration.is_finite()) {
        bail!("--duration must be positive");
    }
    if !(args.t60_min_ms > 0.0 && args.t60_min_ms <= args.t60_max_ms) {
        bail!("T60 range must be positive and ordered");
    }
    if !(args.snr_min_db <= args.snr_max_db) || !args.snr_min_db.is_finite() || !args.snr_max_db.is_finite() {
        bail!("SNR range must be finite and ordered");
    }
    let seed = args.seed.or(file.seed).unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let plans: Vec<Plan> = (0..args.count)
        .map(|i| Plan {
            id: default_id(i),
            t60_ms: rng.gen_range(args.t60_min_ms..=args.t60_max_ms),
            snr_db: rng.gen_range(args.snr_min_db..=args.snr_max_db),
            source_seed: rng.gen(),
            rir_seed: rng.gen(),
            noise_seed: rng.gen(),
            mix_seed: rng.gen(),
        })
        .collect();

    let noise_len = ((args.duration + 1.0) * wpekit::signal::SAMPLE_RATE as f64).round() as usize;
    let rendered = par_try_map(&plans, |p| {
        let source = speech_like(args.duration, p.source_seed);
        let mut gen = RirGenerator::new(p.t60_ms, args.direct_delay_ms, args.rir_length_ms);
        gen.tail_level = args.tail_level;
        gen.channels = args.channels;
        let rir = gen.generate(p.rir_seed)?;
        let noise = match args.noise {
            NoiseKind::Babble => babble_noise(args.channels, noise_len, p.noise_seed),
            NoiseKind::White => white_noise(args.channels, noise_len, p.noise_seed),
        };
        Ok((source, rir, noise))
    })?;

    for sub in ["sources", "rirs", "noise"] {
        create_dir(&args.out_dir.join(sub))?;
    }
    let mut lines = Vec::with_capacity(plans.len());
    for (p, (source, rir, noise)) in plans.iter().zip(&rendered) {
        let rel = |sub: &str| format!("{sub}/{}.wav", p.id);
        save_wav(source, args.out_dir.join(rel("sources")), BitDepth::Float32)?;
        save_wav(rir, args.out_dir.join(rel("rirs")), BitDepth::Float32)?;
        save_wav(noise, args.out_dir.join(rel("noise")), BitDepth::Float32)?;
        lines.push(json!({
            "id": p.id,
            "source": rel("sources"),
            "rir": rel("rirs"),
            "noise": rel("noise"),
            "snr_db": p.snr_db,
            "seed": p.mix_seed,
        }));
    }
    write_file(&args.out_dir.join("manifest.jsonl"), jsonl(&lines).as_bytes())?;
    let t60: Vec<_> = plans.iter().map(|p| json!({ "id": p.id, "t60_ms": p.t60_ms })).collect();
    write_file(&args.out_dir.join("rooms.jsonl"), jsonl(&t60).as_bytes())
}
