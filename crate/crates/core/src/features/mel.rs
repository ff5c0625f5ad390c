use ndarray::Array2;

use super::{FeatureKind, FeatureMatrix};
use crate::signal::Spectrogram;
use crate::{Error, Result};

pub const DEFAULT_BANDS: usize = 64;
pub const DEFAULT_MFCC: usize = 20;
/// Power floor applied before every logarithm.
pub const LOG_FLOOR: f64 = 1e-10;

pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Triangular filters equally spaced on the HTK mel scale from 0 Hz to
/// Nyquist, shape `(bands, fft_len/2 + 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MelFilterbank {
    weights: Array2<f64>,
}

impl MelFilterbank {
    pub fn new(bands: usize, fft_len: usize, sample_rate: u32) -> Result<Self> {
        if bands < 2 {
            return Err(Error::config("a mel filterbank needs at least two bands"));
        }
        let bins = fft_len / 2 + 1;
        let nyquist = sample_rate as f64 / 2.0;
        let top = hz_to_mel(nyquist);
        let edges: Vec<f64> = (0..bands + 2)
            .map(|i| mel_to_hz(top * i as f64 / (bands + 1) as f64))
            .collect();
        let mut weights = Array2::zeros((bands, bins));
        for m in 0..bands {
            let (lo, mid, hi) = (edges[m], edges[m + 1], edges[m + 2]);
            for k in 0..bins {
                let f = k as f64 * sample_rate as f64 / fft_len as f64;
                let w = if f > lo && f <= mid {
                    (f - lo) / (mid - lo)
                } else if f > mid && f < hi {
                    (hi - f) / (hi - mid)
                } else {
                    0.0
                };
                weights[[m, k]] = w;
            }
        }
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &Array2<f64> {
        &self.weights
    }

    pub fn bands(&self) -> usize {
        self.weights.nrows()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.weights.rows().into_iter().map(|r| r.sum()).collect()
    }
}

/// Log mel-filterbank energies of a mono spectrogram.
pub fn log_mfbe(spec: &Spectrogram, bands: usize) -> Result<FeatureMatrix> {
    if spec.num_channels() != 1 {
        return Err(Error::config("mel features need a mono spectrogram"));
    }
    let cfg = spec.config();
    let fb = MelFilterbank::new(bands, cfg.fft_len, spec.sample_rate())?;
    let power = spec.data().index_axis(ndarray::Axis(0), 0).mapv(|z| z.norm_sqr());
    let energies = power.dot(&fb.weights.t());
    FeatureMatrix::new(
        energies.mapv(|e| e.max(LOG_FLOOR).ln()),
        FeatureKind::LogMfbe,
        bands,
        cfg.fft_len,
        spec.sample_rate(),
        cfg.hop_len as f64 / spec.sample_rate() as f64,
    )
}

/// First `coeffs` orthonormal DCT-II coefficients over the band axis.
pub fn mfcc(features: &FeatureMatrix, coeffs: usize) -> Result<FeatureMatrix> {
    if features.kind() != FeatureKind::LogMfbe {
        return Err(Error::config("MFCCs are computed from log mel energies"));
    }
    let n = features.num_coeffs();
    if coeffs > n {
        return Err(Error::config(format!("{coeffs} cepstra requested from {n} bands")));
    }
    let basis = Array2::from_shape_fn((n, coeffs), |(j, k)| {
        let scale = if k == 0 { (1.0 / n as f64).sqrt() } else { (2.0 / n as f64).sqrt() };
        scale * (std::f64::consts::PI * k as f64 * (2 * j + 1) as f64 / (2 * n) as f64).cos()
    });
    Ok(features.with_values(features.values().dot(&basis), FeatureKind::Mfcc))
}
