use ndarray::{Array2, Array3};
use num_complex::Complex64;

use crate::signal::Spectrogram;
use crate::{Error, Result};

/// Delayed stack `[Y_{t-Δ}; …; Y_{t-Δ-K+1}]` for one bin, shape `(T, D·K)`,
/// element `k·D + d` holding channel `d` at lag `Δ + k`. Missing history is
/// zero.
pub fn delayed_stack_for_bin(
    spec: &Spectrogram,
    bin: usize,
    delay: usize,
    taps: usize,
) -> Array2<Complex64> {
    let (d_count, t_count) = (spec.num_channels(), spec.num_frames());
    let data = spec.data();
    let mut out = Array2::zeros((t_count, d_count * taps));
    for t in 0..t_count {
        for k in 0..taps {
            let lag = delay + k;
            if lag > t {
                break;
            }
            for d in 0..d_count {
                out[[t, k * d_count + d]] = data[[d, t - lag, bin]];
            }
        }
    }
    out
}

/// Delayed stack for every bin, shape `(T, F, D·K)`.
pub fn build_delayed_stack(spec: &Spectrogram, delay: usize, taps: usize) -> Result<Array3<Complex64>> {
    if taps == 0 {
        return Err(Error::config("a delayed stack needs at least one tap"));
    }
    let (t_count, f_count) = (spec.num_frames(), spec.num_bins());
    let dk = spec.num_channels() * taps;
    let mut out = Array3::zeros((t_count, f_count, dk));
    for f in 0..f_count {
        let s = delayed_stack_for_bin(spec, f, delay, taps);
        for t in 0..t_count {
            for i in 0..dk {
                out[[t, f, i]] = s[[t, i]];
            }
        }
    }
    Ok(out)
}
