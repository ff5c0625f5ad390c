use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use serde_json::json;
use wpekit::asv::{
    cosine_scores, det_points, eer, min_dcf, parse_scores, write_det, write_scores, ScoreLine, TrialList,
    TrialScoreSet,
};
use wpekit::features::load_embeddings;

use super::{emit, jsonl, write_file};
use crate::config::{self, dcf_json, FileConfig};

#[derive(Debug, clap::Args)]
#[command(group(clap::ArgGroup::new("input").required(true).args(["embeddings", "scores"])))]
pub struct Args {
    /// `<enroll-id> <test-id> <target|nontarget>` per line.
    #[arg(long)]
    trials: PathBuf,
    /// Embedding table; trials are scored by cosine similarity.
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// Precomputed `<enroll-id> <test-id> <score>` lines.
    #[arg(long)]
    scores: Option<PathBuf>,
    #[arg(long)]
    p_target: Option<f64>,
    #[arg(long)]
    c_miss: Option<f64>,
    #[arg(long)]
    c_fa: Option<f64>,
    /// DET points as `P_fa P_miss` lines.
    #[arg(long)]
    det_out: Option<PathBuf>,
    /// Write the cosine scores computed from `--embeddings`.
    #[arg(long, requires = "embeddings")]
    scores_out: Option<PathBuf>,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: Args, file: &FileConfig) -> Result<()> {
    let mut dcf = config::dcf(&file.dcf);
    if let Some(v) = args.p_target {
        dcf.p_target = v;
    }
    if let Some(v) = args.c_miss {
        dcf.c_miss = v;
    }
    if let Some(v) = args.c_fa {
        dcf.c_fa = v;
    }
    dcf.validate()?;
    let trials = TrialList::load(&args.trials).with_context(|| format!("reading trials {}", args.trials.display()))?;

    let (set, computed) = match (&args.embeddings, &args.scores) {
        (Some(path), _) => {
            let table = load_embeddings(path).with_context(|| format!("reading embeddings {}", path.display()))?;
            let scores = cosine_scores(&trials, &table)?;
            let lines: Vec<ScoreLine> = trials
                .entries
                .iter()
                .zip(&scores)
                .map(|(t, &score)| ScoreLine { enroll: t.enroll.clone(), test: t.test.clone(), score })
                .collect();
            (TrialScoreSet::from_scores(&trials, &lines)?, Some(lines))
        }
        (None, Some(path)) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading scores {}", path.display()))?;
            (TrialScoreSet::from_scores(&trials, &parse_scores(&text)?)?, None)
        }
        (None, None) => unreachable!("clap requires one input"),
    };
    let (eer_value, eer_threshold) = eer(&set)?;
    let (dcf_value, dcf_threshold) = min_dcf(&set, &dcf)?;
    let det = det_points(&set);

    if let (Some(path), Some(lines)) = (&args.scores_out, &computed) {
        write_file(path, write_scores(lines).as_bytes())?;
    }
    if let Some(path) = &args.det_out {
        write_file(path, write_det(&det).as_bytes())?;
    }
    let report = [
        json!({ "type": "config", "dcf": dcf_json(&dcf), "source": if computed.is_some() { "embeddings" } else { "scores" } }),
        json!({
            "type": "score",
            "trials": trials.len(),
            "targets": set.targets().len(),
            "nontargets": set.nontargets().len(),
            "eer": eer_value,
            "eer_threshold": eer_threshold,
            "min_dcf": dcf_value,
            "min_dcf_threshold": dcf_threshold,
            "det_points": det.len(),
        }),
    ];
    emit(args.out.as_deref(), &jsonl(&report))
}
