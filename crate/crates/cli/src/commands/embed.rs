use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use wpekit::features::{toy_embedding, write_embeddings};
use wpekit::signal::load_wav;

use super::{emit, par_try_map, require_file, wav_stem};
use crate::config::FileConfig;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// WAV files; each is keyed by its file name without `.wav`.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Embedding table path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: Args, _file: &FileConfig) -> Result<()> {
    let mut ids = Vec::with_capacity(args.inputs.len());
    for input in &args.inputs {
        require_file(input, "input")?;
        let id = wav_stem(input)?;
        if ids.contains(&id) {
            bail!("two inputs map to the embedding id `{id}`");
        }
        ids.push(id);
    }
    let vectors = par_try_map(&args.inputs, |input| {
        let x = load_wav(input)?;
        Ok(toy_embedding(&x.select(0)).with_context(|| format!("embedding {}", input.display()))?)
    })?;
    let table: BTreeMap<_, _> = ids.into_iter().zip(vectors).collect();
    emit(args.out.as_deref(), &write_embeddings(&table)?)
}
