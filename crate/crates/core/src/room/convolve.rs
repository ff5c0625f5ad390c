use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::signal::TimeSignal;
use crate::{Error, Result};

/// RIRs up to this many taps are convolved directly; longer ones use FFT
/// overlap-add.
pub const DIRECT_CONVOLUTION_MAX_TAPS: usize = 4096;

/// Linear convolution of a mono source with each RIR channel, truncated to
/// the source length.
pub fn convolve(source: &TimeSignal, rir: &TimeSignal) -> Result<TimeSignal> {
    check(source, rir)?;
    let chans = rir
        .channels()
        .iter()
        .map(|h| {
            if h.len() <= DIRECT_CONVOLUTION_MAX_TAPS {
                direct(source.channel(0), h)
            } else {
                overlap_add(source.channel(0), h)
            }
        })
        .collect();
    TimeSignal::new(chans, source.sample_rate())
}

/// [`convolve`] forced onto the O(N·M) path.
pub fn convolve_direct(source: &TimeSignal, rir: &TimeSignal) -> Result<TimeSignal> {
    check(source, rir)?;
    let chans = rir.channels().iter().map(|h| direct(source.channel(0), h)).collect();
    TimeSignal::new(chans, source.sample_rate())
}

/// [`convolve`] forced onto the FFT overlap-add path.
pub fn convolve_fft(source: &TimeSignal, rir: &TimeSignal) -> Result<TimeSignal> {
    check(source, rir)?;
    let chans = rir
        .channels()
        .iter()
        .map(|h| overlap_add(source.channel(0), h))
        .collect();
    TimeSignal::new(chans, source.sample_rate())
}

fn check(source: &TimeSignal, rir: &TimeSignal) -> Result<()> {
    if source.num_channels() != 1 {
        return Err(Error::shape("convolution source must be mono"));
    }
    if source.sample_rate() != rir.sample_rate() {
        return Err(Error::shape("source and RIR sample rates differ"));
    }
    Ok(())
}

fn direct(x: &[f64], h: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut y = vec![0.0; n];
    for (k, &hk) in h.iter().enumerate().take(n) {
        if hk == 0.0 {
            continue;
        }
        for (yi, xi) in y[k..].iter_mut().zip(x) {
            *yi += hk * xi;
        }
    }
    y
}

fn overlap_add(x: &[f64], h: &[f64]) -> Vec<f64> {
    let n = x.len();
    let taps = h.len().min(n);
    if n == 0 || taps == 0 {
        return vec![0.0; n];
    }
    let h = &h[..taps];
    let fft_len = (2 * taps).next_power_of_two().max(64);
    let block = fft_len - taps + 1;
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(fft_len);
    let inv = planner.plan_fft_inverse(fft_len);

    let mut hf: Vec<Complex64> = h.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    hf.resize(fft_len, Complex64::new(0.0, 0.0));
    fwd.process(&mut hf);

    let scale = 1.0 / fft_len as f64;
    let mut y = vec![0.0; n];
    let mut buf = vec![Complex64::new(0.0, 0.0); fft_len];
    let mut start = 0;
    while start < n {
        let end = (start + block).min(n);
        buf.iter_mut().for_each(|b| *b = Complex64::new(0.0, 0.0));
        for (b, &v) in buf.iter_mut().zip(&x[start..end]) {
            b.re = v;
        }
        fwd.process(&mut buf);
        for (b, hv) in buf.iter_mut().zip(&hf) {
            *b *= hv;
        }
        inv.process(&mut buf);
        for (yi, b) in y[start..].iter_mut().zip(&buf) {
            *yi += b.re * scale;
        }
        start = end;
    }
    y
}
