use std::path::{Path, PathBuf};

use crate::signal::{load_wav, read_dump, stft, Spectrogram, StftConfig, TimeSignal};
use crate::{Error, Result};

/// Provider of the second, virtual channel.
#[derive(Debug, Clone, PartialEq)]
pub enum VirtualChannel {
    /// A WAV file or spectrogram dump produced elsewhere.
    File(PathBuf),
    /// The actual signal delayed by whole samples.
    DelayedCopy { delay_samples: usize },
    /// The actual signal through an FIR filter.
    FilteredCopy { taps: Vec<f64> },
}

fn is_dump(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("spg"))
}

fn fir(x: &[f64], h: &[f64]) -> Vec<f64> {
    (0..x.len())
        .map(|n| h.iter().take(n + 1).enumerate().map(|(k, hk)| hk * x[n - k]).sum())
        .collect()
}

/// Virtual-channel spectrogram aligned with the mono `actual` signal under
/// `config`.
pub fn virtual_channel_source(
    kind: &VirtualChannel,
    actual: &TimeSignal,
    config: &StftConfig,
) -> Result<Spectrogram> {
    if actual.num_channels() != 1 {
        return Err(Error::config("the actual signal must be mono"));
    }
    let expected = (1, config.num_frames(actual.len()), config.num_bins());
    let spec = match kind {
        VirtualChannel::DelayedCopy { delay_samples } => {
            let x = actual.channel(0);
            let d = (*delay_samples).min(x.len());
            let mut v = vec![0.0; d];
            v.extend_from_slice(&x[..x.len() - d]);
            stft(&TimeSignal::mono(v, actual.sample_rate())?, config)?
        }
        VirtualChannel::FilteredCopy { taps } => {
            if taps.is_empty() {
                return Err(Error::config("filtered copy needs at least one tap"));
            }
            let v = fir(actual.channel(0), taps);
            stft(&TimeSignal::mono(v, actual.sample_rate())?, config)?
        }
        VirtualChannel::File(path) if is_dump(path) => {
            let data = read_dump(path)?;
            if data.dim() != expected {
                return Err(Error::format(format!(
                    "virtual channel dump has shape {:?}, expected {expected:?}",
                    data.dim()
                )));
            }
            Spectrogram::from_parts(data, *config, actual.sample_rate(), actual.len())?
        }
        VirtualChannel::File(path) => {
            let v = load_wav(path)?;
            if v.num_channels() != 1 || v.len() != actual.len() || v.sample_rate() != actual.sample_rate() {
                return Err(Error::format(format!(
                    "virtual channel WAV is {}x{} at {} Hz, expected mono, {} samples at {} Hz",
                    v.num_channels(),
                    v.len(),
                    v.sample_rate(),
                    actual.len(),
                    actual.sample_rate()
                )));
            }
            stft(&v, config)?
        }
    };
    Ok(spec)
}
