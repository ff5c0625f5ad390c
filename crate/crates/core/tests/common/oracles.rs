//! Brute-force reference implementations used as independent oracles.
#![allow(dead_code)]

use nalgebra::DMatrix;
use ndarray::{Array2, Array3};
use num_complex::Complex64;
use rand::Rng;
use wpekit::signal::{Spectrogram, StftConfig, Window};

/// Spectrogram on a tiny analysis grid; `bins − 1` must be a power of two.
pub fn tiny_spec(data: Array3<Complex64>) -> Spectrogram {
    let (_, frames, bins) = data.dim();
    let fft = 2 * (bins - 1);
    let hop = fft / 2;
    let cfg = StftConfig::new(fft, hop, fft, Window::SqrtHann, true).unwrap();
    Spectrogram::from_parts(data, cfg, 16_000, (frames - 1) * hop).unwrap()
}

pub fn random_complex(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn random_data(rng: &mut impl Rng, d: usize, t: usize, f: usize) -> Array3<Complex64> {
    Array3::from_shape_simple_fn((d, t, f), || random_complex(rng))
}

/// `(t, f, k·D + d)` element-by-element.
pub fn naive_stack(data: &Array3<Complex64>, delay: usize, taps: usize) -> Array3<Complex64> {
    let (dn, tn, fn_) = data.dim();
    let mut out = Array3::zeros((tn, fn_, dn * taps));
    for t in 0..tn {
        for f in 0..fn_ {
            for k in 0..taps {
                for d in 0..dn {
                    let src = t as isize - (delay + k) as isize;
                    if src >= 0 {
                        out[[t, f, k * dn + d]] = data[[d, src as usize, f]];
                    }
                }
            }
        }
    }
    out
}

/// Loaded `R` and `P` for one bin from explicit sums of outer products.
pub fn naive_loaded_system(
    data: &Array3<Complex64>,
    lambda: &Array2<f64>,
    f: usize,
    delay: usize,
    taps: usize,
    eps: f64,
) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
    let (dn, tn, _) = data.dim();
    let n = dn * taps;
    let stack = naive_stack(data, delay, taps);
    let mut r = DMatrix::<Complex64>::zeros(n, n);
    let mut p = DMatrix::<Complex64>::zeros(n, dn);
    for t in 0..tn {
        let s = DMatrix::from_fn(n, 1, |i, _| stack[[t, f, i]]);
        let y = DMatrix::from_fn(dn, 1, |d, _| data[[d, t, f]]);
        r += &s * s.adjoint() / Complex64::new(lambda[[t, f]], 0.0);
        p += &s * y.adjoint() / Complex64::new(lambda[[t, f]], 0.0);
    }
    let trace: f64 = (0..n).map(|i| r[(i, i)].re).sum();
    for i in 0..n {
        r[(i, i)] += Complex64::new(eps * trace / n as f64, 0.0);
    }
    (r, p)
}

/// `pinv(R) · P` for Hermitian `R`, through its eigendecomposition
/// `R = V Λ Vᴴ`; eigenvalues below `n·ε·max|λ|` count as zero.
pub fn pinv_solution(r: &DMatrix<Complex64>, p: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = r.nrows();
    let eig = r.clone().symmetric_eigen();
    let top = eig.eigenvalues.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let cut = n as f64 * f64::EPSILON * top;
    let mut vh = eig.eigenvectors.adjoint();
    for (i, &l) in eig.eigenvalues.iter().enumerate() {
        let inv = if l.abs() > cut { 1.0 / l } else { 0.0 };
        vh.row_mut(i).scale_mut(inv);
    }
    &eig.eigenvectors * vh * p
}

/// `Z = Y − Gᴴ Ỹ` by explicit loops; `g` is `(bin, D·K, D)`.
pub fn naive_apply(data: &Array3<Complex64>, g: &Array3<Complex64>, delay: usize, taps: usize) -> Array3<Complex64> {
    let (dn, tn, fn_) = data.dim();
    let stack = naive_stack(data, delay, taps);
    let mut out = data.clone();
    for f in 0..fn_ {
        for t in 0..tn {
            for d in 0..dn {
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..dn * taps {
                    acc += g[[f, i, d]].conj() * stack[[t, f, i]];
                }
                out[[d, t, f]] -= acc;
            }
        }
    }
    out
}

pub fn rel_err_c(a: impl IntoIterator<Item = Complex64>, b: impl IntoIterator<Item = Complex64>) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for (x, y) in a.into_iter().zip(b) {
        num += (x - y).norm_sqr();
        den += y.norm_sqr();
    }
    if den == 0.0 {
        num.sqrt()
    } else {
        (num / den).sqrt()
    }
}

/// Miss and false-alarm rates when accepting `score >= threshold`.
pub fn rates_at(targets: &[f64], nontargets: &[f64], threshold: f64) -> (f64, f64) {
    let miss = targets.iter().filter(|&&s| s < threshold).count() as f64 / targets.len() as f64;
    let fa = nontargets.iter().filter(|&&s| s >= threshold).count() as f64 / nontargets.len() as f64;
    (miss, fa)
}

fn candidate_thresholds(targets: &[f64], nontargets: &[f64]) -> Vec<f64> {
    let mut th: Vec<f64> = targets.iter().chain(nontargets).copied().collect();
    th.push(f64::NEG_INFINITY);
    th.push(f64::INFINITY);
    th.sort_by(|a, b| a.partial_cmp(b).unwrap());
    th.dedup();
    th
}

/// Minimum normalised detection cost over every threshold.
pub fn brute_min_dcf(targets: &[f64], nontargets: &[f64], p_target: f64, c_miss: f64, c_fa: f64) -> f64 {
    let norm = (c_miss * p_target).min(c_fa * (1.0 - p_target));
    candidate_thresholds(targets, nontargets)
        .into_iter()
        .map(|th| {
            let (m, fa) = rates_at(targets, nontargets, th);
            (c_miss * p_target * m + c_fa * (1.0 - p_target) * fa) / norm
        })
        .fold(f64::INFINITY, f64::min)
}

/// Equal error rate by scanning every threshold for the sign change of
/// `P_miss − P_fa` and interpolating linearly between the two neighbours.
pub fn brute_eer(targets: &[f64], nontargets: &[f64]) -> f64 {
    let th = candidate_thresholds(targets, nontargets);
    let pts: Vec<(f64, f64)> = th.iter().map(|&t| rates_at(targets, nontargets, t)).collect();
    for w in pts.windows(2) {
        let (m0, f0) = w[0];
        let (m1, f1) = w[1];
        let (d0, d1) = (m0 - f0, m1 - f1);
        if d0 == 0.0 {
            return m0;
        }
        if d0 < 0.0 && d1 >= 0.0 {
            if d1 == 0.0 {
                return m1;
            }
            let a = d0 / (d0 - d1);
            return m0 + a * (m1 - m0);
        }
    }
    unreachable!("P_miss − P_fa runs from −1 to +1")
}
