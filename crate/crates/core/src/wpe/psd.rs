use ndarray::{Array2, Axis};

use super::PsdMode;
use crate::signal::Spectrogram;
use crate::{Error, Result};

/// Per-(frame, bin) power weights `λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdEstimate {
    values: Array2<f64>,
    mode: PsdMode,
}

impl PsdEstimate {
    /// Wrap non-negative values without flooring.
    pub fn new(values: Array2<f64>, mode: PsdMode) -> Result<Self> {
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::format("PSD values must be finite and non-negative"));
        }
        Ok(Self { values, mode })
    }

    /// Channel-averaged `|X|^2`, unfloored.
    pub fn power_of(spec: &Spectrogram, mode: PsdMode) -> Self {
        let values = spec
            .power()
            .mean_axis(Axis(0))
            .expect("spectrograms have at least one channel");
        Self { values, mode }
    }

    /// External PSD given as natural-log power.
    pub fn from_lps(lps: &Array2<f64>) -> Result<Self> {
        if lps.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
            return Err(Error::format("log-power values must be finite or -inf"));
        }
        Self::new(lps.mapv(f64::exp), PsdMode::External)
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn mode(&self) -> PsdMode {
        self.mode
    }

    pub fn num_frames(&self) -> usize {
        self.values.dim().0
    }

    pub fn num_bins(&self) -> usize {
        self.values.dim().1
    }

    /// Absolute floor `psd_floor · max λ`, never below the smallest normal.
    pub fn floor_level(&self, psd_floor: f64) -> f64 {
        let max = self.values.iter().fold(0.0f64, |m, &v| m.max(v));
        (psd_floor * max).max(f64::MIN_POSITIVE)
    }

    pub fn floored(&self, psd_floor: f64) -> Self {
        let floor = self.floor_level(psd_floor);
        Self {
            values: self.values.mapv(|v| v.max(floor)),
            mode: self.mode,
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            values: self.values.mapv(|v| v * factor),
            mode: self.mode,
        }
    }

    pub fn check_grid(&self, spec: &Spectrogram) -> Result<()> {
        if self.values.dim() != (spec.num_frames(), spec.num_bins()) {
            return Err(Error::config(format!(
                "PSD grid {:?} does not match spectrogram grid ({}, {})",
                self.values.dim(),
                spec.num_frames(),
                spec.num_bins()
            )));
        }
        Ok(())
    }
}

/// PSD weights for one WPE pass, floored at `psd_floor` relative to the
/// maximum.
///
/// `input` is the observation for [`PsdMode::Observed`], the previous
/// output for [`PsdMode::Iterative`] and the early-speech reference for
/// [`PsdMode::Oracle`]; for [`PsdMode::External`] it only fixes the grid.
/// Multichannel inputs are averaged over channels; pass a single channel to
/// weight by the actual channel only.
pub fn estimate_psd(
    input: &Spectrogram,
    mode: PsdMode,
    external: Option<&PsdEstimate>,
    psd_floor: f64,
) -> Result<PsdEstimate> {
    if !(psd_floor > 0.0) {
        return Err(Error::config("PSD floor must be positive"));
    }
    let raw = match (mode, external) {
        (PsdMode::External, Some(ext)) => {
            ext.check_grid(input)?;
            ext.clone()
        }
        (PsdMode::External, None) => {
            return Err(Error::config("external PSD mode needs PSD values"));
        }
        (_, Some(_)) => {
            return Err(Error::config(format!(
                "PSD values were supplied but the mode is {mode}"
            )));
        }
        (mode, None) => PsdEstimate::power_of(input, mode),
    };
    Ok(raw.floored(psd_floor))
}
