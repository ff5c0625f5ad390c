use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use ndarray::Axis;
use serde_json::{json, Value};
use wpekit::signal::{istft, load_wav, read_dump, save_wav, stft, BitDepth, Spectrogram, StftConfig, TimeSignal};
use wpekit::wpe::{dereverberate, vace_dereverberate, virtual_channel_source, PsdEstimate, PsdMode, VirtualChannel, WpeConfig};

use super::{create_dir, file_name, jsonl, par_try_map, parent_dir, require_file, same_dir, wav_stem, write_file};
use crate::config::{self, stft_json, wpe_json, FileConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Mode {
    /// Single pass with the observed-signal PSD, K=30.
    #[value(name = "wpe_single", alias = "wpe-single")]
    WpeSingle,
    /// Iterative PSD re-estimation, K=30, 3 iterations.
    #[value(name = "wpe_iterative", alias = "wpe-iterative")]
    WpeIterative,
    /// Dual-channel WPE over the input and a virtual channel, K=15.
    #[value(name = "vace")]
    Vace,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::WpeSingle => "wpe_single",
            Mode::WpeIterative => "wpe_iterative",
            Mode::Vace => "vace",
        }
    }

    fn defaults(self) -> WpeConfig {
        match self {
            Mode::WpeSingle => WpeConfig { psd_mode: PsdMode::Observed, iterations: 1, ..WpeConfig::single() },
            Mode::WpeIterative => WpeConfig::single(),
            Mode::Vace => WpeConfig::vace(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OracleKind {
    #[value(name = "early_clean")]
    EarlyClean,
    #[value(name = "early_noisy")]
    EarlyNoisy,
}

impl OracleKind {
    fn name(self) -> &'static str {
        match self {
            OracleKind::EarlyClean => "early_clean",
            OracleKind::EarlyNoisy => "early_noisy",
        }
    }
}

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Input WAV files; outputs keep their file names.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, value_enum)]
    mode: Mode,
    #[arg(long)]
    taps: Option<usize>,
    #[arg(long)]
    delay: Option<usize>,
    #[arg(long)]
    iterations: Option<usize>,
    /// PSD source: observed, iterative, oracle or external.
    #[arg(long)]
    psd: Option<PsdMode>,
    #[arg(long)]
    diag_load: Option<f64>,
    #[arg(long)]
    psd_floor: Option<f64>,
    /// Virtual channel: delayed:N, filtered:h0,h1,..., file:DIR or channel:N.
    #[arg(long = "virtual")]
    virtual_source: Option<String>,
    /// Directory holding oracle references for `--psd oracle`.
    #[arg(long)]
    oracle_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OracleKind::EarlyClean)]
    oracle_kind: OracleKind,
    /// Directory of `<stem>.spg` log-power dumps for `--psd external`.
    #[arg(long)]
    psd_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
enum VirtualSpec {
    Synth(VirtualChannel),
    Dir(PathBuf),
    Channel(usize),
}

fn parse_virtual(spec: &str) -> Result<VirtualSpec> {
    let Some((kind, arg)) = spec.split_once(':') else {
        bail!("virtual source `{spec}` must look like kind:argument");
    };
    Ok(match kind {
        "delayed" => VirtualSpec::Synth(VirtualChannel::DelayedCopy {
            delay_samples: arg.parse().with_context(|| format!("bad delay in `{spec}`"))?,
        }),
        "filtered" => {
            let taps = arg
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .with_context(|| format!("bad filter taps in `{spec}`"))?;
            if taps.iter().any(|t| !t.is_finite()) {
                bail!("filter taps must be finite");
            }
            VirtualSpec::Synth(VirtualChannel::FilteredCopy { taps })
        }
        "file" => VirtualSpec::Dir(PathBuf::from(arg)),
        "channel" => {
            let n: usize = arg.parse().with_context(|| format!("bad channel in `{spec}`"))?;
            if n == 0 {
                bail!("channel 0 is the actual channel; pick 1 or higher");
            }
            VirtualSpec::Channel(n)
        }
        other => bail!("unknown virtual source kind `{other}` (expected delayed, filtered, file or channel)"),
    })
}

/// Reference for `input`: `<id>.observed.wav` maps to `<id>.<kind>.wav`,
/// anything else to the same file name.
fn oracle_path(dir: &Path, input: &Path, kind: OracleKind) -> Result<PathBuf> {
    let name = file_name(input)?;
    let mapped = match name.strip_suffix(".observed.wav") {
        Some(id) => format!("{id}.{}.wav", kind.name()),
        None => name,
    };
    Ok(dir.join(mapped))
}

fn virtual_file(dir: &Path, input: &Path) -> Result<PathBuf> {
    let dump = dir.join(format!("{}.spg", wav_stem(input)?));
    if dump.is_file() {
        Ok(dump)
    } else {
        Ok(dir.join(file_name(input)?))
    }
}

fn external_psd(dir: &Path, input: &Path) -> Result<PsdEstimate> {
    let path = dir.join(format!("{}.spg", wav_stem(input)?));
    let dump = read_dump(&path).with_context(|| format!("reading {}", path.display()))?;
    if dump.dim().0 != 1 {
        bail!("{}: PSD dump must have one channel, found {}", path.display(), dump.dim().0);
    }
    let lps = dump.index_axis(Axis(0), 0).mapv(|z| z.re);
    Ok(PsdEstimate::from_lps(&lps)?)
}

struct Plan {
    mode: Mode,
    wpe: WpeConfig,
    stft: StftConfig,
    virtual_spec: Option<VirtualSpec>,
    oracle_dir: Option<PathBuf>,
    oracle_kind: OracleKind,
    psd_dir: Option<PathBuf>,
}

impl Plan {
    fn oracle(&self, input: &Path, channel0: bool) -> Result<Option<Spectrogram>> {
        let Some(dir) = &self.oracle_dir else { return Ok(None) };
        let path = oracle_path(dir, input, self.oracle_kind)?;
        let mut r = load_wav(&path).with_context(|| format!("reading oracle {}", path.display()))?;
        if channel0 {
            r = r.select(0);
        }
        Ok(Some(stft(&r, &self.stft)?))
    }

    fn external(&self, input: &Path) -> Result<Option<PsdEstimate>> {
        self.psd_dir.as_deref().map(|d| external_psd(d, input)).transpose()
    }

    fn process(&self, input: &Path) -> Result<(TimeSignal, Value)> {
        let start = Instant::now();
        let x = load_wav(input)?;
        x.require_workbench_rate()?;
        let external = self.external(input)?;
        let out = if self.mode == Mode::Vace {
            let (actual, virt) = match self.virtual_spec.as_ref().expect("validated") {
                VirtualSpec::Channel(n) => {
                    if x.num_channels() <= *n {
                        bail!("virtual channel {n} requested but the input has {} channels", x.num_channels());
                    }
                    let actual = x.select(0);
                    let virt = stft(&x.select(*n), &self.stft)?;
                    (actual, virt)
                }
                other => {
                    if x.num_channels() != 1 {
                        bail!("vace needs mono input unless the virtual source is channel:N");
                    }
                    let kind = match other {
                        VirtualSpec::Synth(k) => k.clone(),
                        VirtualSpec::Dir(d) => VirtualChannel::File(virtual_file(d, input)?),
                        VirtualSpec::Channel(_) => unreachable!(),
                    };
                    let virt = virtual_channel_source(&kind, &x, &self.stft)?;
                    (x.clone(), virt)
                }
            };
            let oracle = self.oracle(input, true)?;
            let spec = stft(&actual, &self.stft)?;
            istft(&vace_dereverberate(&spec, &virt, &self.wpe, oracle.as_ref(), external.as_ref())?)?
        } else {
            let oracle = self.oracle(input, false)?;
            let spec = stft(&x, &self.stft)?;
            istft(&dereverberate(&spec, &self.wpe, oracle.as_ref(), external.as_ref())?)?
        };
        let row = json!({
            "type": "utterance",
            "input": file_name(input)?,
            "channels_in": x.num_channels(),
            "channels_out": out.num_channels(),
            "length": out.len(),
            "elapsed_ms": start.elapsed().as_secs_f64() * 1e3,
        });
        Ok((out, row))
    }
}

pub fn run(args: Args, file: &FileConfig) -> Result<()> {
    let mut wpe = config::wpe_config(&file.wpe, args.mode.defaults())?;
    if let Some(v) = args.taps {
        wpe.taps = v;
    }
    if let Some(v) = args.delay {
        wpe.delay = v;
    }
    if let Some(v) = args.iterations {
        wpe.iterations = v;
    }
    if let Some(v) = args.psd {
        wpe.psd_mode = v;
    }
    if let Some(v) = args.diag_load {
        wpe.diag_load = v;
    }
    if let Some(v) = args.psd_floor {
        wpe.psd_floor = v;
    }
    wpe.validate()?;
    let stft_cfg = config::stft_config(&file.stft, StftConfig::dereverb())?;

    let virtual_spec = args.virtual_source.as_deref().map(parse_virtual).transpose()?;
    match (args.mode, &virtual_spec) {
        (Mode::Vace, None) => bail!("vace mode needs a virtual source (--virtual)"),
        (Mode::WpeSingle | Mode::WpeIterative, Some(_)) => bail!("--virtual only applies to vace mode"),
        _ => {}
    }
    match (wpe.psd_mode, &args.oracle_dir) {
        (PsdMode::Oracle, None) => bail!("oracle PSD needs --oracle-dir"),
        (m, Some(_)) if m != PsdMode::Oracle => bail!("--oracle-dir only applies with --psd oracle"),
        _ => {}
    }
    match (wpe.psd_mode, &args.psd_dir) {
        (PsdMode::External, None) => bail!("external PSD needs --psd-dir"),
        (m, Some(_)) if m != PsdMode::External => bail!("--psd-dir only applies with --psd external"),
        _ => {}
    }

    let mut names = HashSet::new();
    for input in &args.inputs {
        require_file(input, "input")?;
        if !names.insert(file_name(input)?) {
            bail!("two inputs share the file name `{}`", file_name(input)?);
        }
        if same_dir(&parent_dir(input), &args.out_dir) {
            bail!("output directory would overwrite input `{}`", input.display());
        }
    }

    let plan = Plan {
        mode: args.mode,
        wpe,
        stft: stft_cfg,
        virtual_spec,
        oracle_dir: args.oracle_dir,
        oracle_kind: args.oracle_kind,
        psd_dir: args.psd_dir,
    };
    let results = par_try_map(&args.inputs, |input| {
        plan.process(input).with_context(|| format!("dereverberating {}", input.display()))
    })?;

    create_dir(&args.out_dir)?;
    let mut log = vec![json!({
        "type": "config",
        "mode": args.mode.name(),
        "wpe": wpe_json(&plan.wpe),
        "stft": stft_json(&plan.stft),
        "virtual": args.virtual_source,
        "oracle_kind": plan.oracle_dir.as_ref().map(|_| plan.oracle_kind.name()),
    })];
    for (input, (out, row)) in args.inputs.iter().zip(results) {
        save_wav(&out, args.out_dir.join(file_name(input)?), BitDepth::Float32)?;
        log.push(row);
    }
    write_file(&args.out_dir.join("dereverb.jsonl"), jsonl(&log).as_bytes())
}
