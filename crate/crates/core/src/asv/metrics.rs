use std::fmt::Write as _;

use super::TrialScoreSet;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DcfParams {
    pub p_target: f64,
    pub c_miss: f64,
    pub c_fa: f64,
}

impl DcfParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.p_target > 0.0 && self.p_target < 1.0) {
            return Err(Error::config("target prior must lie in (0, 1)"));
        }
        if !(self.c_miss > 0.0 && self.c_fa > 0.0) || !self.c_miss.is_finite() || !self.c_fa.is_finite() {
            return Err(Error::config("detection costs must be positive"));
        }
        Ok(())
    }
}

impl Default for DcfParams {
    fn default() -> Self {
        Self { p_target: 0.01, c_miss: 1.0, c_fa: 1.0 }
    }
}

fn sorted(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

/// `(threshold, P_miss, P_fa)` at `-∞`, every distinct score and `+∞`,
/// in increasing threshold order.
fn operating_points(scores: &TrialScoreSet) -> Vec<(f64, f64, f64)> {
    let tar = sorted(scores.targets());
    let non = sorted(scores.nontargets());
    let mut thresholds: Vec<f64> = tar.iter().chain(&non).copied().collect();
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();
    let (nt, nn) = (tar.len() as f64, non.len() as f64);
    let mut out = Vec::with_capacity(thresholds.len() + 2);
    out.push((f64::NEG_INFINITY, 0.0, 1.0));
    for th in thresholds {
        let misses = tar.partition_point(|&s| s < th);
        let accepted = non.len() - non.partition_point(|&s| s < th);
        out.push((th, misses as f64 / nt, accepted as f64 / nn));
    }
    out.push((f64::INFINITY, 1.0, 0.0));
    out
}

/// Equal error rate and its threshold, interpolating linearly between the
/// operating points where `P_miss − P_fa` changes sign.
pub fn eer(scores: &TrialScoreSet) -> Result<(f64, f64)> {
    let pts = operating_points(scores);
    for w in pts.windows(2) {
        let (t0, m0, f0) = w[0];
        let (t1, m1, f1) = w[1];
        let (d0, d1) = (m0 - f0, m1 - f1);
        if d0 == 0.0 {
            return Ok((m0, t0));
        }
        if d0 < 0.0 && d1 >= 0.0 {
            if d1 == 0.0 {
                return Ok((m1, t1));
            }
            let a = d0 / (d0 - d1);
            let th = match (t0.is_finite(), t1.is_finite()) {
                (true, true) => t0 + a * (t1 - t0),
                (true, false) => t0,
                _ => t1,
            };
            return Ok((m0 + a * (m1 - m0), th));
        }
    }
    Err(Error::Precondition("miss and false-alarm rates never cross".into()))
}

/// Minimum normalised detection cost and the lowest threshold attaining it.
pub fn min_dcf(scores: &TrialScoreSet, params: &DcfParams) -> Result<(f64, f64)> {
    params.validate()?;
    let norm = (params.c_miss * params.p_target).min(params.c_fa * (1.0 - params.p_target));
    let mut best = (f64::INFINITY, f64::NAN);
    for (th, m, fa) in operating_points(scores) {
        let cost = (params.c_miss * params.p_target * m + params.c_fa * (1.0 - params.p_target) * fa) / norm;
        if cost < best.0 {
            best = (cost, th);
        }
    }
    Ok(best)
}

/// `(P_fa, P_miss)` at every distinct score and at `+∞`, ordered by
/// increasing threshold.
pub fn det_points(scores: &TrialScoreSet) -> Vec<(f64, f64)> {
    operating_points(scores)
        .into_iter()
        .skip(1)
        .map(|(_, m, fa)| (fa, m))
        .collect()
}

/// Two-column `P_fa P_miss` text.
pub fn write_det(points: &[(f64, f64)]) -> String {
    let mut out = String::new();
    for (fa, m) in points {
        writeln!(out, "{fa:?} {m:?}").unwrap();
    }
    out
}
