//! TOML run configuration. Command-line flags override file values, which
//! override built-in defaults.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use serde_json::{json, Value};
use wpekit::asv::DcfParams;
use wpekit::features::LossWeights;
use wpekit::signal::{StftConfig, Window};
use wpekit::wpe::{PsdMode, WpeConfig};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub jobs: Option<usize>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub wpe: WpeSection,
    #[serde(default)]
    pub stft: StftSection,
    #[serde(default)]
    pub simulate: SimulateSection,
    #[serde(default)]
    pub loss: LossSection,
    #[serde(default)]
    pub dcf: DcfSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WpeSection {
    pub delay: Option<usize>,
    pub taps: Option<usize>,
    pub iterations: Option<usize>,
    pub psd_mode: Option<String>,
    pub diag_load: Option<f64>,
    pub psd_floor: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StftSection {
    pub frame_len: Option<usize>,
    pub hop_len: Option<usize>,
    pub fft_len: Option<usize>,
    pub window: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    pub early_boundary_ms: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsSection {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub eta: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossSection {
    #[serde(default)]
    pub pretrain: WeightsSection,
    #[serde(default)]
    pub finetune: WeightsSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DcfSection {
    pub p_target: Option<f64>,
    pub c_miss: Option<f64>,
    pub c_fa: Option<f64>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

pub fn parse_window(name: &str) -> Result<Window> {
    Ok(match name {
        "sqrt_hann" => Window::SqrtHann,
        "hann" => Window::Hann,
        "rectangular" => Window::Rectangular,
        other => bail!("unknown window `{other}` (expected sqrt_hann, hann or rectangular)"),
    })
}

pub fn window_name(w: Window) -> &'static str {
    match w {
        Window::SqrtHann => "sqrt_hann",
        Window::Hann => "hann",
        Window::Rectangular => "rectangular",
    }
}

/// Merge the `[stft]` section over `base`.
pub fn stft_config(file: &StftSection, base: StftConfig) -> Result<StftConfig> {
    let window = match &file.window {
        Some(w) => parse_window(w)?,
        None => base.window,
    };
    Ok(StftConfig::new(
        file.frame_len.unwrap_or(base.frame_len),
        file.hop_len.unwrap_or(base.hop_len),
        file.fft_len.unwrap_or(base.fft_len),
        window,
        base.center_pad,
    )?)
}

/// Merge the `[wpe]` section over `base`.
pub fn wpe_config(file: &WpeSection, base: WpeConfig) -> Result<WpeConfig> {
    let psd_mode = match &file.psd_mode {
        Some(m) => m.parse::<PsdMode>()?,
        None => base.psd_mode,
    };
    Ok(WpeConfig {
        delay: file.delay.unwrap_or(base.delay),
        taps: file.taps.unwrap_or(base.taps),
        iterations: file.iterations.unwrap_or(base.iterations),
        psd_mode,
        diag_load: file.diag_load.unwrap_or(base.diag_load),
        psd_floor: file.psd_floor.unwrap_or(base.psd_floor),
    })
}

pub fn weights(file: &WeightsSection, base: LossWeights) -> Result<LossWeights> {
    let w = LossWeights {
        alpha: file.alpha.unwrap_or(base.alpha),
        beta: file.beta.unwrap_or(base.beta),
        gamma: file.gamma.unwrap_or(base.gamma),
        eta: file.eta.unwrap_or(base.eta),
    };
    w.validate()?;
    Ok(w)
}

pub fn dcf(file: &DcfSection) -> DcfParams {
    let base = DcfParams::default();
    DcfParams {
        p_target: file.p_target.unwrap_or(base.p_target),
        c_miss: file.c_miss.unwrap_or(base.c_miss),
        c_fa: file.c_fa.unwrap_or(base.c_fa),
    }
}

pub fn stft_json(c: &StftConfig) -> Value {
    json!({
        "frame_len": c.frame_len,
        "hop_len": c.hop_len,
        "fft_len": c.fft_len,
        "window": window_name(c.window),
        "center_pad": c.center_pad,
    })
}

pub fn wpe_json(c: &WpeConfig) -> Value {
    json!({
        "delay": c.delay,
        "taps": c.taps,
        "iterations": c.iterations,
        "psd_mode": c.psd_mode.name(),
        "diag_load": c.diag_load,
        "psd_floor": c.psd_floor,
    })
}

pub fn weights_json(w: &LossWeights) -> Value {
    json!({ "alpha": w.alpha, "beta": w.beta, "gamma": w.gamma, "eta": w.eta })
}

pub fn dcf_json(p: &DcfParams) -> Value {
    json!({ "p_target": p.p_target, "c_miss": p.c_miss, "c_fa": p.c_fa })
}
