use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::signal::{TimeSignal, SAMPLE_RATE};
use crate::{Error, Result};

/// Early/late boundary measured from the main peak.
pub const DEFAULT_EARLY_BOUNDARY_MS: f64 = 50.0;

/// Initial amplitude of the synthetic reverberant tail relative to the
/// direct-path tap.
pub const DEFAULT_TAIL_LEVEL: f64 = 0.03;

const LN_1000: f64 = 6.907_755_278_982_137;

/// An RIR with the location of its main peak and the early/late split.
#[derive(Debug, Clone, PartialEq)]
pub struct RirBundle {
    pub impulse_response: TimeSignal,
    pub main_peak_index: usize,
    /// Samples after the main peak that still count as early reflections.
    pub early_boundary: usize,
}

impl RirBundle {
    /// First sample index belonging to the late part.
    pub fn split_index(&self) -> usize {
        self.main_peak_index + self.early_boundary
    }

    pub fn early_rir(&self) -> TimeSignal {
        self.masked(true)
    }

    pub fn late_rir(&self) -> TimeSignal {
        self.masked(false)
    }

    fn masked(&self, early: bool) -> TimeSignal {
        let k = self.split_index();
        let chans = self
            .impulse_response
            .channels()
            .iter()
            .map(|c| {
                c.iter()
                    .enumerate()
                    .map(|(i, &v)| if (i < k) == early { v } else { 0.0 })
                    .collect()
            })
            .collect();
        TimeSignal::new(chans, self.impulse_response.sample_rate())
            .expect("mask keeps the RIR shape")
    }
}

/// Result of [`split_rir`].
#[derive(Debug, Clone, PartialEq)]
pub struct RirSplit {
    pub bundle: RirBundle,
    pub early_rir: TimeSignal,
    pub late_rir: TimeSignal,
}

fn argmax_abs(x: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in x.iter().enumerate() {
        if v.abs() > x[best].abs() {
            best = i;
        }
    }
    best
}

/// Split an RIR at `boundary_ms` after the main peak of channel 0.
///
/// A boundary past the end of the RIR leaves the late part all zero.
pub fn split_rir(rir: &TimeSignal, boundary_ms: f64) -> Result<RirSplit> {
    if rir.is_empty() {
        return Err(Error::degenerate("RIR is empty"));
    }
    if !(boundary_ms > 0.0) || !boundary_ms.is_finite() {
        return Err(Error::config("early boundary must be positive"));
    }
    let peak = argmax_abs(rir.channel(0));
    let requested = ((boundary_ms * rir.sample_rate() as f64 / 1000.0).round() as usize).max(1);
    let early_boundary = requested.min(rir.len() - peak).max(1);
    let bundle = RirBundle {
        impulse_response: rir.clone(),
        main_peak_index: peak,
        early_boundary,
    };
    Ok(RirSplit {
        early_rir: bundle.early_rir(),
        late_rir: bundle.late_rir(),
        bundle,
    })
}

/// Amplitude envelope of a tail decaying by 60 dB over `t60_ms`.
pub fn decay_envelope(t60_ms: f64, t_ms: f64) -> f64 {
    (-LN_1000 * t_ms / t60_ms).exp()
}

/// Exponentially decaying white-noise RIR model.
#[derive(Debug, Clone, PartialEq)]
pub struct RirGenerator {
    pub t60_ms: f64,
    pub direct_delay_ms: f64,
    pub length_ms: f64,
    pub tail_level: f64,
    pub channels: usize,
    /// Extra direct-path delay of each further channel, in samples.
    pub mic_spacing_samples: usize,
}

impl RirGenerator {
    pub fn new(t60_ms: f64, direct_delay_ms: f64, length_ms: f64) -> Self {
        Self {
            t60_ms,
            direct_delay_ms,
            length_ms,
            tail_level: DEFAULT_TAIL_LEVEL,
            channels: 1,
            mic_spacing_samples: 2,
        }
    }

    pub fn generate(&self, seed: u64) -> Result<TimeSignal> {
        if !(self.t60_ms > 0.0) || !self.t60_ms.is_finite() {
            return Err(Error::config("T60 must be positive"));
        }
        if !(self.direct_delay_ms >= 0.0) || !(self.length_ms > 0.0) {
            return Err(Error::config("RIR delay and length must be non-negative"));
        }
        if self.channels == 0 {
            return Err(Error::config("RIR needs at least one channel"));
        }
        if !(self.tail_level >= 0.0 && self.tail_level < 1.0) {
            return Err(Error::config("tail level must lie in [0, 1)"));
        }
        let fs = SAMPLE_RATE as f64;
        let delay = (self.direct_delay_ms * fs / 1000.0).round() as usize;
        let len = (self.length_ms * fs / 1000.0).round() as usize;
        let last_delay = delay + (self.channels - 1) * self.mic_spacing_samples;
        if last_delay >= len {
            return Err(Error::config(format!(
                "RIR of {len} samples cannot hold a direct path at sample {last_delay}"
            )));
        }
        let clamp = 0.5;
        let mut chans = Vec::with_capacity(self.channels);
        for c in 0..self.channels {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let d = delay + c * self.mic_spacing_samples;
            let mut h = vec![0.0; len];
            h[d] = 1.0;
            for (i, tap) in h.iter_mut().enumerate().skip(d + 1) {
                let g: f64 = StandardNormal.sample(&mut rng);
                let t_ms = (i - d) as f64 * 1000.0 / fs;
                let v = self.tail_level * g * decay_envelope(self.t60_ms, t_ms);
                *tap = v.clamp(-clamp, clamp);
            }
            chans.push(h);
        }
        TimeSignal::new(chans, SAMPLE_RATE)
    }
}

/// Single-channel synthetic RIR with the default tail level.
pub fn synth_rir(t60_ms: f64, direct_delay_ms: f64, length_ms: f64, seed: u64) -> Result<TimeSignal> {
    RirGenerator::new(t60_ms, direct_delay_ms, length_ms).generate(seed)
}
