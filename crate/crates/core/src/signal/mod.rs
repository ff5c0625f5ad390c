//! Time-domain signals, WAV I/O and the STFT pair shared by every other module.

mod dump;
mod stft;
mod wav;

pub use dump::{read_dump, read_dump_bytes, write_dump, write_dump_bytes};
pub use stft::{istft, stft, Spectrogram, StftConfig, Window};
pub use wav::{load_wav, save_wav, BitDepth};

use crate::{Error, Result};

/// The only sample rate the workbench accepts.
pub const SAMPLE_RATE: u32 = 16_000;

/// Sampled waveform, one or more channels of equal length.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSignal {
    channels: Vec<Vec<f64>>,
    sample_rate: u32,
}

impl TimeSignal {
    pub fn new(channels: Vec<Vec<f64>>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::config("sample rate must be positive"));
        }
        let Some(first) = channels.first() else {
            return Err(Error::config("a signal needs at least one channel"));
        };
        let len = first.len();
        if channels.iter().any(|c| c.len() != len) {
            return Err(Error::shape("channels have unequal lengths"));
        }
        Ok(Self {
            channels,
            sample_rate,
        })
    }

    pub fn mono(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        Self::new(vec![samples], sample_rate)
    }

    pub fn zeros(num_channels: usize, len: usize, sample_rate: u32) -> Result<Self> {
        Self::new(vec![vec![0.0; len]; num_channels.max(1)], sample_rate)
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }

    /// Samples per channel.
    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn channel(&self, index: usize) -> &[f64] {
        &self.channels[index]
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    pub fn into_channels(self) -> Vec<Vec<f64>> {
        self.channels
    }

    /// Single-channel signal holding a copy of channel `index`.
    pub fn select(&self, index: usize) -> TimeSignal {
        TimeSignal {
            channels: vec![self.channels[index].clone()],
            sample_rate: self.sample_rate,
        }
    }

    /// Sum of squares over all channels.
    pub fn energy(&self) -> f64 {
        self.channels
            .iter()
            .flat_map(|c| c.iter())
            .map(|x| x * x)
            .sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.channels
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn scaled(&self, gain: f64) -> TimeSignal {
        self.map(|x| gain * x)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> TimeSignal {
        TimeSignal {
            channels: self
                .channels
                .iter()
                .map(|c| c.iter().map(|&x| f(x)).collect())
                .collect(),
            sample_rate: self.sample_rate,
        }
    }

    /// Element-wise `f(self, other)`; shapes and rates must agree.
    pub fn zip_with(&self, other: &TimeSignal, f: impl Fn(f64, f64) -> f64) -> Result<TimeSignal> {
        self.check_compatible(other)?;
        Ok(TimeSignal {
            channels: self
                .channels
                .iter()
                .zip(&other.channels)
                .map(|(a, b)| a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect())
                .collect(),
            sample_rate: self.sample_rate,
        })
    }

    pub fn add(&self, other: &TimeSignal) -> Result<TimeSignal> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &TimeSignal) -> Result<TimeSignal> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn check_compatible(&self, other: &TimeSignal) -> Result<()> {
        if self.sample_rate != other.sample_rate {
            return Err(Error::shape(format!(
                "sample rates differ: {} vs {}",
                self.sample_rate, other.sample_rate
            )));
        }
        if self.num_channels() != other.num_channels() || self.len() != other.len() {
            return Err(Error::shape(format!(
                "signal shapes differ: {}x{} vs {}x{}",
                self.num_channels(),
                self.len(),
                other.num_channels(),
                other.len()
            )));
        }
        Ok(())
    }

    /// Reject anything not sampled at [`SAMPLE_RATE`].
    pub fn require_workbench_rate(&self) -> Result<()> {
        if self.sample_rate != SAMPLE_RATE {
            return Err(Error::config(format!(
                "sample rate {} Hz is not supported; the workbench runs at {} Hz only",
                self.sample_rate, SAMPLE_RATE
            )));
        }
        Ok(())
    }

    /// Stack single- or multi-channel signals of equal length into one signal.
    pub fn stack(parts: &[&TimeSignal]) -> Result<TimeSignal> {
        let Some(first) = parts.first() else {
            return Err(Error::config("nothing to stack"));
        };
        let mut channels = Vec::new();
        for p in parts {
            if p.sample_rate != first.sample_rate || p.len() != first.len() {
                return Err(Error::shape("stacked signals must share rate and length"));
            }
            channels.extend(p.channels.iter().cloned());
        }
        TimeSignal::new(channels, first.sample_rate)
    }
}

/// Relative L2 distance `‖a − b‖ / ‖b‖` over all channels.
pub fn relative_l2(a: &TimeSignal, b: &TimeSignal) -> Result<f64> {
    a.check_compatible(b)?;
    let num: f64 = a
        .channels()
        .iter()
        .zip(b.channels())
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)))
        .sum();
    let den = b.energy();
    if den == 0.0 {
        return Err(Error::degenerate("reference signal has zero energy"));
    }
    Ok((num / den).sqrt())
}
