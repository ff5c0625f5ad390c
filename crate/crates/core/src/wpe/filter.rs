use ndarray::{Array2, Array3, ArrayView2};
use num_complex::Complex64;
use rayon::prelude::*;

use super::psd::{estimate_psd, PsdEstimate};
use super::solve::solve_hermitian;
use super::{PsdMode, WpeConfig};
use crate::signal::Spectrogram;
use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Per-bin prediction filters `G_f`, stored `(bin, k·D + d, output channel)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpFilterSet {
    filters: Array3<Complex64>,
    delay: usize,
    taps: usize,
    channels: usize,
}

impl LpFilterSet {
    pub fn new(filters: Array3<Complex64>, delay: usize, taps: usize, channels: usize) -> Result<Self> {
        let (_, dk, d) = filters.dim();
        if dk != taps * channels || d != channels {
            return Err(Error::shape(format!(
                "filter shape {:?} does not fit {channels} channels and {taps} taps",
                filters.dim()
            )));
        }
        if delay < 1 {
            return Err(Error::config("prediction delay must be at least one frame"));
        }
        if filters.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Numerical {
                bin: 0,
                reason: "non-finite filter coefficient".into(),
            });
        }
        Ok(Self { filters, delay, taps, channels })
    }

    pub fn zeros(bins: usize, delay: usize, taps: usize, channels: usize) -> Self {
        Self {
            filters: Array3::zeros((bins, taps * channels, channels)),
            delay,
            taps,
            channels,
        }
    }

    pub fn filters(&self) -> &Array3<Complex64> {
        &self.filters
    }

    /// `G_f`, shape `(D·K, D)`.
    pub fn bin(&self, f: usize) -> ArrayView2<'_, Complex64> {
        self.filters.index_axis(ndarray::Axis(0), f)
    }

    pub fn delay(&self) -> usize {
        self.delay
    }

    pub fn taps(&self) -> usize {
        self.taps
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn num_bins(&self) -> usize {
        self.filters.dim().0
    }
}

/// Weighted correlation `R_f` (`D·K × D·K`) and cross-correlation `P_f`
/// (`D·K × D`) of one bin.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalEquations {
    pub r: Array2<Complex64>,
    pub p: Array2<Complex64>,
}

fn bin_frames(spec: &Spectrogram, bin: usize) -> Array2<Complex64> {
    let data = spec.data();
    Array2::from_shape_fn((spec.num_frames(), spec.num_channels()), |(t, d)| data[[d, t, bin]])
}

fn stack_at(y: &Array2<Complex64>, t: usize, delay: usize, taps: usize, out: &mut [Complex64]) {
    let d_count = y.ncols();
    for k in 0..taps {
        let lag = delay + k;
        for d in 0..d_count {
            out[k * d_count + d] = if lag <= t { y[[t - lag, d]] } else { ZERO };
        }
    }
}

/// `R_f = Σ_t Ỹ Ỹᴴ / λ` and `P_f = Σ_t Ỹ Yᴴ / λ` over all frames.
pub fn accumulate_normal_equations(
    spec: &Spectrogram,
    psd: &PsdEstimate,
    bin: usize,
    delay: usize,
    taps: usize,
) -> NormalEquations {
    accumulate(&bin_frames(spec, bin), psd.values().column(bin), delay, taps)
}

fn accumulate(
    y: &Array2<Complex64>,
    lambda: ndarray::ArrayView1<f64>,
    delay: usize,
    taps: usize,
) -> NormalEquations {
    let (t_count, d_count) = y.dim();
    let n = d_count * taps;
    let mut r = Array2::<Complex64>::zeros((n, n));
    let mut p = Array2::<Complex64>::zeros((n, d_count));
    let mut s = vec![ZERO; n];
    for t in delay.min(t_count)..t_count {
        stack_at(y, t, delay, taps, &mut s);
        let w = 1.0 / lambda[t];
        for i in 0..n {
            let a = s[i] * w;
            if a == ZERO {
                continue;
            }
            for j in 0..=i {
                r[[i, j]] += a * s[j].conj();
            }
            for d in 0..d_count {
                p[[i, d]] += a * y[[t, d]].conj();
            }
        }
    }
    for i in 0..n {
        r[[i, i]].im = 0.0;
        for j in 0..i {
            r[[j, i]] = r[[i, j]].conj();
        }
    }
    NormalEquations { r, p }
}

/// `R + ε·tr(R)/n · I`.
pub fn load_diagonal(r: &Array2<Complex64>, diag_load: f64) -> Array2<Complex64> {
    let n = r.nrows();
    let trace: f64 = (0..n).map(|i| r[[i, i]].re).sum();
    let mut out = r.clone();
    if n > 0 {
        let mu = diag_load * trace / n as f64;
        for i in 0..n {
            out[[i, i]].re += mu;
        }
    }
    out
}

fn check_psd(spec: &Spectrogram, psd: &PsdEstimate) -> Result<()> {
    psd.check_grid(spec)?;
    if psd.values().iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::Precondition(
            "PSD weights must be floored to positive finite values".into(),
        ));
    }
    Ok(())
}

fn solve_bin(eq: &NormalEquations, diag_load: f64, bin: usize) -> Result<Array2<Complex64>> {
    let trace: f64 = (0..eq.r.nrows()).map(|i| eq.r[[i, i]].re).sum();
    if trace == 0.0 {
        return Ok(Array2::zeros(eq.p.dim()));
    }
    solve_hermitian(&load_diagonal(&eq.r, diag_load), &eq.p, bin)
}

/// Estimate `G_f = (R_f + loading)⁻¹ P_f` for every bin.
pub fn wpe_filter_estimate(
    spec: &Spectrogram,
    psd: &PsdEstimate,
    config: &WpeConfig,
) -> Result<LpFilterSet> {
    config.validate()?;
    check_psd(spec, psd)?;
    let (d_count, f_count) = (spec.num_channels(), spec.num_bins());
    if config.taps == 0 {
        return Ok(LpFilterSet::zeros(f_count, config.delay, 0, d_count));
    }
    let per_bin: Vec<Result<Array2<Complex64>>> = (0..f_count)
        .into_par_iter()
        .map(|f| {
            let eq = accumulate(&bin_frames(spec, f), psd.values().column(f), config.delay, config.taps);
            solve_bin(&eq, config.diag_load, f)
        })
        .collect();
    let n = d_count * config.taps;
    let mut filters = Array3::zeros((f_count, n, d_count));
    for (f, g) in per_bin.into_iter().enumerate() {
        filters.index_axis_mut(ndarray::Axis(0), f).assign(&g?);
    }
    LpFilterSet::new(filters, config.delay, config.taps, d_count)
}

/// `Z = Y − Gᴴ Ỹ` with zero-filled history.
pub fn wpe_apply(spec: &Spectrogram, filters: &LpFilterSet) -> Result<Spectrogram> {
    let (d_count, t_count, f_count) = spec.data().dim();
    if filters.channels() != d_count || filters.num_bins() != f_count {
        return Err(Error::shape(format!(
            "filters for {} channels and {} bins applied to {:?}",
            filters.channels(),
            filters.num_bins(),
            spec.data().dim()
        )));
    }
    if filters.taps() == 0 {
        return Ok(spec.clone());
    }
    let (delay, taps) = (filters.delay(), filters.taps());
    let per_bin: Vec<Array2<Complex64>> = (0..f_count)
        .into_par_iter()
        .map(|f| {
            let y = bin_frames(spec, f);
            let g = filters.bin(f);
            let n = d_count * taps;
            let mut s = vec![ZERO; n];
            let mut z = y.clone();
            for t in delay.min(t_count)..t_count {
                stack_at(&y, t, delay, taps, &mut s);
                for d in 0..d_count {
                    let mut pred = ZERO;
                    for i in 0..n {
                        pred += g[[i, d]].conj() * s[i];
                    }
                    z[[t, d]] -= pred;
                }
            }
            z
        })
        .collect();
    let mut out = spec.data().clone();
    for (f, z) in per_bin.iter().enumerate() {
        for t in 0..t_count {
            for d in 0..d_count {
                out[[d, t, f]] = z[[t, d]];
            }
        }
    }
    spec.with_data(out)
}

/// One estimation and application pass with the given PSD.
pub fn wpe(spec: &Spectrogram, psd: &PsdEstimate, config: &WpeConfig) -> Result<Spectrogram> {
    let filters = wpe_filter_estimate(spec, psd, config)?;
    wpe_apply(spec, &filters)
}

/// Classic iterative WPE: `λ` starts from the observation and is
/// re-estimated from `|Z|^2` after each of `config.iterations` passes.
pub fn iterative_wpe(spec: &Spectrogram, config: &WpeConfig) -> Result<Spectrogram> {
    config.validate()?;
    let mut psd = estimate_psd(spec, PsdMode::Observed, None, config.psd_floor)?;
    let mut out = wpe(spec, &psd, config)?;
    for _ in 1..config.iterations {
        psd = estimate_psd(&out, PsdMode::Iterative, None, config.psd_floor)?;
        out = wpe(spec, &psd, config)?;
    }
    Ok(out)
}

/// Run WPE with the PSD source selected by `config.psd_mode`.
///
/// `oracle` is the early-speech reference for [`PsdMode::Oracle`];
/// `external` supplies the values for [`PsdMode::External`].
pub fn dereverberate(
    spec: &Spectrogram,
    config: &WpeConfig,
    oracle: Option<&Spectrogram>,
    external: Option<&PsdEstimate>,
) -> Result<Spectrogram> {
    config.validate()?;
    match config.psd_mode {
        PsdMode::Observed => {
            let psd = estimate_psd(spec, PsdMode::Observed, None, config.psd_floor)?;
            wpe(spec, &psd, config)
        }
        PsdMode::Iterative => iterative_wpe(spec, config),
        PsdMode::Oracle => {
            let reference = oracle.ok_or_else(|| Error::config("oracle PSD mode needs a reference"))?;
            spec.check_same_grid(reference)?;
            let psd = estimate_psd(reference, PsdMode::Oracle, None, config.psd_floor)?;
            wpe(spec, &psd, config)
        }
        PsdMode::External => {
            let psd = estimate_psd(spec, PsdMode::External, external, config.psd_floor)?;
            wpe(spec, &psd, config)
        }
    }
}

/// Dual-channel WPE over `[actual; virtual]` keeping only the actual
/// channel's output.
pub fn vace_wpe(
    actual: &Spectrogram,
    virtual_channel: &Spectrogram,
    config: &WpeConfig,
    psd: &PsdEstimate,
) -> Result<Spectrogram> {
    if actual.num_channels() != 1 || virtual_channel.num_channels() != 1 {
        return Err(Error::config("actual and virtual channels must each be mono"));
    }
    actual
        .check_same_shape(virtual_channel)
        .map_err(|e| Error::config(e.to_string()))?;
    if config.taps == 0 {
        config.validate()?;
        return Ok(actual.clone());
    }
    let stacked = Spectrogram::stack(&[actual, virtual_channel])?;
    let out = wpe(&stacked, psd, config)?;
    Ok(out.channel(0))
}

/// [`vace_wpe`] with the PSD source selected by `config.psd_mode`. Observed
/// and iterative weights come from the actual channel only.
pub fn vace_dereverberate(
    actual: &Spectrogram,
    virtual_channel: &Spectrogram,
    config: &WpeConfig,
    oracle: Option<&Spectrogram>,
    external: Option<&PsdEstimate>,
) -> Result<Spectrogram> {
    config.validate()?;
    match config.psd_mode {
        PsdMode::Observed => {
            let psd = estimate_psd(actual, PsdMode::Observed, None, config.psd_floor)?;
            vace_wpe(actual, virtual_channel, config, &psd)
        }
        PsdMode::Iterative => {
            let mut psd = estimate_psd(actual, PsdMode::Observed, None, config.psd_floor)?;
            let mut out = vace_wpe(actual, virtual_channel, config, &psd)?;
            for _ in 1..config.iterations {
                psd = estimate_psd(&out, PsdMode::Iterative, None, config.psd_floor)?;
                out = vace_wpe(actual, virtual_channel, config, &psd)?;
            }
            Ok(out)
        }
        PsdMode::Oracle => {
            let reference = oracle.ok_or_else(|| Error::config("oracle PSD mode needs a reference"))?;
            actual.check_same_grid(reference)?;
            let psd = estimate_psd(reference, PsdMode::Oracle, None, config.psd_floor)?;
            vace_wpe(actual, virtual_channel, config, &psd)
        }
        PsdMode::External => {
            let psd = estimate_psd(actual, PsdMode::External, external, config.psd_floor)?;
            vace_wpe(actual, virtual_channel, config, &psd)
        }
    }
}
