//! Seeded stand-in sources for simulation and tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::signal::{TimeSignal, SAMPLE_RATE};

/// Unit-variance Gaussian white noise.
pub fn white_noise(channels: usize, len: usize, seed: u64) -> TimeSignal {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chans = (0..channels.max(1))
        .map(|_| (0..len).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect();
    TimeSignal::new(chans, SAMPLE_RATE).expect("equal-length channels")
}

/// Stationary low-pass noise with a speech-like downward spectral tilt.
pub fn babble_noise(channels: usize, len: usize, seed: u64) -> TimeSignal {
    let white = white_noise(channels, len, seed);
    let chans = white
        .channels()
        .iter()
        .map(|c| {
            let mut state = 0.0;
            c.iter()
                .map(|&v| {
                    state = 0.9 * state + v;
                    state
                })
                .collect()
        })
        .collect();
    TimeSignal::new(chans, SAMPLE_RATE).expect("equal-length channels")
}

/// Speech-like mono signal: voiced syllables of 80–250 ms built from a
/// harmonic series with formant-like resonances, separated by short pauses.
/// Peak amplitude is 0.5.
pub fn speech_like(duration_s: f64, seed: u64) -> TimeSignal {
    let fs = SAMPLE_RATE as f64;
    let len = (duration_s * fs).round().max(1.0) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = vec![0.0; len];
    let mut pos = (rng.gen_range(0.01..0.05) * fs) as usize;
    while pos < len {
        let syl = (rng.gen_range(0.08..0.25) * fs) as usize;
        let f0 = rng.gen_range(90.0..220.0);
        let glide = rng.gen_range(-0.3..0.3);
        let formants = [
            rng.gen_range(300.0..900.0),
            rng.gen_range(900.0..2400.0),
            rng.gen_range(2400.0..3500.0),
        ];
        let gain = rng.gen_range(0.3..1.0);
        let mut phase = 0.0f64;
        for i in 0..syl.min(len - pos) {
            let u = i as f64 / syl as f64;
            let env = (std::f64::consts::PI * u).sin().powi(2);
            let f = f0 * (1.0 + glide * u);
            phase += 2.0 * std::f64::consts::PI * f / fs;
            let mut s = 0.0;
            let mut h = 1;
            while f * h as f64 <= 4000.0 {
                let fh = f * h as f64;
                let w: f64 = formants
                    .iter()
                    .map(|&fm| 1.0 / (1.0 + ((fh - fm) / 150.0).powi(2)))
                    .sum();
                s += w * (h as f64 * phase).sin() / h as f64;
                h += 1;
            }
            let breath: f64 = StandardNormal.sample(&mut rng);
            x[pos + i] += gain * env * (s + 0.05 * breath);
        }
        pos += syl + (rng.gen_range(0.02..0.15) * fs) as usize;
    }
    let peak = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > 0.0 {
        x.iter_mut().for_each(|v| *v *= 0.5 / peak);
    }
    TimeSignal::mono(x, SAMPLE_RATE).expect("mono")
}
