use nalgebra::DMatrix;
use ndarray::Array2;
use num_complex::Complex64;

use crate::{Error, Result};

/// Solve `A X = B` for Hermitian positive-definite `A` by a complex
/// Cholesky factorisation `A = L Lᴴ`. Only the lower triangle of `A` is
/// read. Returns `None` when a pivot is not positive and finite.
pub fn cholesky_solve(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Option<Array2<Complex64>> {
    let n = a.nrows();
    let mut l = Array2::<Complex64>::zeros((n, n));
    for j in 0..n {
        let mut diag = a[[j, j]].re;
        for k in 0..j {
            diag -= l[[j, k]].norm_sqr();
        }
        if !(diag > 0.0) || !diag.is_finite() {
            return None;
        }
        let ljj = diag.sqrt();
        l[[j, j]] = Complex64::new(ljj, 0.0);
        for i in j + 1..n {
            let mut v = a[[i, j]];
            for k in 0..j {
                v -= l[[i, k]] * l[[j, k]].conj();
            }
            l[[i, j]] = v / ljj;
        }
    }
    let m = b.ncols();
    let mut x = b.clone();
    for c in 0..m {
        for i in 0..n {
            let mut v = x[[i, c]];
            for k in 0..i {
                v -= l[[i, k]] * x[[k, c]];
            }
            x[[i, c]] = v / l[[i, i]].re;
        }
        for i in (0..n).rev() {
            let mut v = x[[i, c]];
            for k in i + 1..n {
                v -= l[[k, i]].conj() * x[[k, c]];
            }
            x[[i, c]] = v / l[[i, i]].re;
        }
    }
    if x.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Some(x)
    } else {
        None
    }
}

fn least_squares(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Option<Array2<Complex64>> {
    let n = a.nrows();
    let m = b.ncols();
    let am = DMatrix::from_fn(n, n, |i, j| {
        if i >= j {
            a[[i, j]]
        } else {
            a[[j, i]].conj()
        }
    });
    let bm = DMatrix::from_fn(n, m, |i, j| b[[i, j]]);
    let scale = am.iter().fold(0.0f64, |s, z| s.max(z.norm()));
    let x = am.svd(true, true).solve(&bm, scale * 1e-14).ok()?;
    let out = Array2::from_shape_fn((n, m), |(i, j)| x[(i, j)]);
    out.iter()
        .all(|z| z.re.is_finite() && z.im.is_finite())
        .then_some(out)
}

/// Cholesky solve with a least-squares fallback; failure of both is a
/// numerical error attributed to `bin`.
pub fn solve_hermitian(
    a: &Array2<Complex64>,
    b: &Array2<Complex64>,
    bin: usize,
) -> Result<Array2<Complex64>> {
    let finite = |m: &Array2<Complex64>| m.iter().all(|z| z.re.is_finite() && z.im.is_finite());
    if !finite(a) || !finite(b) {
        return Err(Error::Numerical {
            bin,
            reason: "non-finite normal equations".into(),
        });
    }
    if let Some(x) = cholesky_solve(a, b) {
        return Ok(x);
    }
    least_squares(a, b).ok_or_else(|| Error::Numerical {
        bin,
        reason: "normal equations are singular after loading".into(),
    })
}
