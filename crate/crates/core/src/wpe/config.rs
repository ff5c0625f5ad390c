use crate::{Error, Result};

pub const DEFAULT_DELAY: usize = 3;
pub const DEFAULT_TAPS_SINGLE: usize = 30;
pub const DEFAULT_TAPS_VACE: usize = 15;
pub const DEFAULT_ITERATIONS: usize = 3;
pub const DEFAULT_DIAG_LOAD: f64 = 1e-6;
/// Relative to the largest PSD value of the utterance.
pub const DEFAULT_PSD_FLOOR: f64 = 1e-10;

/// Where the PSD weights `λ` come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PsdMode {
    /// Channel-averaged `|Y|^2` of the observation, one pass.
    Observed,
    /// Start from the observation and re-estimate from `|Z|^2` each pass.
    Iterative,
    /// Power of a supplied early-speech reference.
    Oracle,
    /// Values supplied from outside, e.g. a network's log-power output.
    External,
}

impl PsdMode {
    pub fn name(self) -> &'static str {
        match self {
            PsdMode::Observed => "observed",
            PsdMode::Iterative => "iterative",
            PsdMode::Oracle => "oracle",
            PsdMode::External => "external",
        }
    }
}

impl std::str::FromStr for PsdMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "observed" => Ok(PsdMode::Observed),
            "iterative" => Ok(PsdMode::Iterative),
            "oracle" => Ok(PsdMode::Oracle),
            "external" => Ok(PsdMode::External),
            other => Err(Error::config(format!("unknown PSD mode `{other}`"))),
        }
    }
}

impl std::fmt::Display for PsdMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WpeConfig {
    /// Prediction delay `Δ` in frames.
    pub delay: usize,
    /// Filter taps `K` per channel.
    pub taps: usize,
    pub iterations: usize,
    pub psd_mode: PsdMode,
    /// Relative diagonal loading `ε`.
    pub diag_load: f64,
    /// PSD floor relative to the utterance maximum.
    pub psd_floor: f64,
}

impl WpeConfig {
    /// Single-channel iterative WPE.
    pub fn single() -> Self {
        Self {
            delay: DEFAULT_DELAY,
            taps: DEFAULT_TAPS_SINGLE,
            iterations: DEFAULT_ITERATIONS,
            psd_mode: PsdMode::Iterative,
            diag_load: DEFAULT_DIAG_LOAD,
            psd_floor: DEFAULT_PSD_FLOOR,
        }
    }

    /// Dual-channel mode with a virtual second channel.
    pub fn vace() -> Self {
        Self {
            taps: DEFAULT_TAPS_VACE,
            psd_mode: PsdMode::Observed,
            iterations: 1,
            ..Self::single()
        }
    }

    pub fn with_taps(self, taps: usize) -> Self {
        Self { taps, ..self }
    }

    pub fn with_mode(self, psd_mode: PsdMode) -> Self {
        Self { psd_mode, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.delay < 1 {
            return Err(Error::config("prediction delay must be at least one frame"));
        }
        if self.iterations < 1 {
            return Err(Error::config("at least one iteration is required"));
        }
        if !(self.psd_floor > 0.0) || !self.psd_floor.is_finite() {
            return Err(Error::config("PSD floor must be positive"));
        }
        if !(self.diag_load >= 0.0) || !self.diag_load.is_finite() {
            return Err(Error::config("diagonal loading must be non-negative"));
        }
        Ok(())
    }
}

impl Default for WpeConfig {
    fn default() -> Self {
        Self::single()
    }
}
