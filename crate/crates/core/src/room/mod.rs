//! Signal model for reverberant, noisy observations: a source convolved
//! with an RIR split into early and late parts, plus noise at a target SNR.

mod convolve;
mod rir;
pub mod sources;

pub use convolve::{convolve, convolve_direct, convolve_fft, DIRECT_CONVOLUTION_MAX_TAPS};
pub use rir::{decay_envelope, split_rir, synth_rir, RirBundle, RirGenerator, RirSplit,
    DEFAULT_EARLY_BOUNDARY_MS, DEFAULT_TAIL_LEVEL};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::signal::TimeSignal;
use crate::{Error, Result};

/// Components of one simulated observation. All share length, rate and
/// channel count, and `observed == (early_clean + late) + noise` holds
/// bit-for-bit.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSet {
    pub observed: TimeSignal,
    pub early_clean: TimeSignal,
    pub late: TimeSignal,
    pub early_noisy: TimeSignal,
    pub noise: TimeSignal,
    /// Realised `10 log10(E[early + late] / E[noise])`.
    pub snr_db: f64,
}

impl ObservationSet {
    /// Reverberant speech without noise, `early_clean + late`.
    pub fn reverberant(&self) -> TimeSignal {
        self.early_clean
            .add(&self.late)
            .expect("components share a shape by construction")
    }
}

fn snr_db(signal_energy: f64, noise_energy: f64) -> f64 {
    10.0 * (signal_energy / noise_energy).log10()
}

/// Scale `noise` so that `speech` sits `snr_db` above it, and add.
///
/// `noise` must have the channel count of `speech` and at least its length;
/// only the first `speech.len()` samples are used. Returns the noisy mix and
/// the scaled noise that went into it.
pub fn mix_at_snr(
    speech: &TimeSignal,
    noise: &TimeSignal,
    snr_db_target: f64,
) -> Result<(TimeSignal, TimeSignal)> {
    if noise.num_channels() != speech.num_channels() || noise.len() < speech.len() {
        return Err(Error::shape(format!(
            "noise ({}x{}) must cover speech ({}x{})",
            noise.num_channels(),
            noise.len(),
            speech.num_channels(),
            speech.len()
        )));
    }
    if !snr_db_target.is_finite() {
        return Err(Error::config("target SNR must be finite"));
    }
    let noise = if noise.len() == speech.len() {
        noise.clone()
    } else {
        let chans = noise
            .channels()
            .iter()
            .map(|c| c[..speech.len()].to_vec())
            .collect();
        TimeSignal::new(chans, noise.sample_rate())?
    };
    let speech_energy = speech.energy();
    let noise_energy = noise.energy();
    if speech_energy == 0.0 {
        return Err(Error::degenerate("speech has zero energy"));
    }
    if noise_energy == 0.0 {
        return Err(Error::degenerate("noise has zero energy"));
    }
    let gain = (speech_energy / (noise_energy * 10f64.powf(snr_db_target / 10.0))).sqrt();
    let scaled = noise.scaled(gain);
    let noisy = speech.add(&scaled)?;
    Ok((noisy, scaled))
}

/// Bring `noise` to exactly `len` samples: longer noise is cropped at a
/// seeded random offset, shorter noise is tiled from a seeded random
/// circular offset.
pub fn fit_noise(noise: &TimeSignal, len: usize, seed: u64) -> Result<TimeSignal> {
    if noise.is_empty() {
        return Err(Error::degenerate("noise is empty"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = noise.len();
    let chans = if n >= len {
        let offset = rng.gen_range(0..=n - len);
        noise
            .channels()
            .iter()
            .map(|c| c[offset..offset + len].to_vec())
            .collect()
    } else {
        let offset = rng.gen_range(0..n);
        noise
            .channels()
            .iter()
            .map(|c| (0..len).map(|i| c[(offset + i) % n]).collect())
            .collect()
    };
    TimeSignal::new(chans, noise.sample_rate())
}

/// Run the full signal model for one utterance.
///
/// The source is mono; the RIR may have several channels, and the noise
/// must match the RIR's channel count. The SNR is measured against the
/// reverberant speech `early + late`, not the dry source.
pub fn simulate(
    source: &TimeSignal,
    rir: &RirBundle,
    noise: &TimeSignal,
    snr_db_target: f64,
    seed: u64,
) -> Result<ObservationSet> {
    source.require_workbench_rate()?;
    if noise.sample_rate() != source.sample_rate() {
        return Err(Error::shape("noise and source sample rates differ"));
    }
    if noise.num_channels() != rir.impulse_response.num_channels() {
        return Err(Error::shape(format!(
            "noise has {} channels, RIR has {}",
            noise.num_channels(),
            rir.impulse_response.num_channels()
        )));
    }
    let early_clean = convolve(source, &rir.early_rir())?;
    let late = convolve(source, &rir.late_rir())?;
    let reverberant = early_clean.add(&late)?;
    let fitted = fit_noise(noise, source.len(), seed)?;
    let (observed, noise) = mix_at_snr(&reverberant, &fitted, snr_db_target)?;
    let early_noisy = early_clean.add(&noise)?;
    let snr_db = snr_db(reverberant.energy(), noise.energy());
    Ok(ObservationSet {
        observed,
        early_clean,
        late,
        early_noisy,
        noise,
        snr_db,
    })
}
