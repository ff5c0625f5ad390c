mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

/// Offline WPE dereverberation workbench.
#[derive(Debug, Parser)]
#[command(name = "wpekit", version, about)]
struct Cli {
    /// TOML configuration file; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Utterances processed in parallel (default: WPEKIT_JOBS, then all cores).
    #[arg(long, short = 'j', global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic corpus (sources, RIRs, noise) and its manifest.
    Generate(commands::generate::Args),
    /// Convolve, split and mix every manifest entry into observation components.
    Simulate(commands::simulate::Args),
    /// Dereverberate WAV files.
    Dereverb(commands::dereverb::Args),
    /// Compare processed output against simulation references.
    Evaluate(commands::evaluate::Args),
    /// Compute toy speaker embeddings for WAV files.
    Embed(commands::embed::Args),
    /// Score a trial list and report EER, minDCF and DET points.
    Score(commands::score::Args),
}

fn jobs(flag: Option<usize>, file: Option<usize>) -> Result<usize> {
    if let Some(j) = flag.or(file) {
        return Ok(j);
    }
    if let Ok(v) = std::env::var("WPEKIT_JOBS") {
        return v.trim().parse().with_context(|| format!("WPEKIT_JOBS=`{v}` is not a count"));
    }
    Ok(std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn run(cli: Cli) -> Result<()> {
    let file = config::FileConfig::load(cli.config.as_deref())?;
    let jobs = jobs(cli.jobs, file.jobs)?;
    if jobs == 0 {
        anyhow::bail!("--jobs must be at least 1");
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
    pool.install(|| match cli.command {
        Command::Generate(a) => commands::generate::run(a, &file),
        Command::Simulate(a) => commands::simulate::run(a, &file),
        Command::Dereverb(a) => commands::dereverb::run(a, &file),
        Command::Evaluate(a) => commands::evaluate::run(a, &file),
        Command::Embed(a) => commands::embed::run(a, &file),
        Command::Score(a) => commands::score::run(a, &file),
    })
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let numerical = err
        .chain()
        .any(|c| c.downcast_ref::<wpekit::Error>().is_some_and(wpekit::Error::is_numerical));
    if numerical {
        1
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
