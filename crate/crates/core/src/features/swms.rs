use ndarray::Array2;

use super::FeatureMatrix;
use crate::{Error, Result};

pub const DEFAULT_SWMS_SECONDS: f64 = 3.0;

/// Odd window length in frames closest to `window_s`.
pub fn swms_window_frames(window_s: f64, frame_shift: f64) -> usize {
    2 * (window_s / (2.0 * frame_shift)).round() as usize + 1
}

/// Subtract from every frame the mean over a centred window of `window_s`.
/// Near the edges the window slides inward so it keeps its full length when
/// the utterance allows; shorter utterances use the global mean.
pub fn swms(features: &FeatureMatrix, window_s: f64) -> Result<FeatureMatrix> {
    if !(window_s > 0.0) || !window_s.is_finite() {
        return Err(Error::config("mean-subtraction window must be positive"));
    }
    let x = features.values();
    let (t_count, c_count) = x.dim();
    let w = swms_window_frames(window_s, features.frame_shift);
    let half = (w / 2) as isize;
    let mut prefix = Array2::<f64>::zeros((t_count + 1, c_count));
    for t in 0..t_count {
        for c in 0..c_count {
            prefix[[t + 1, c]] = prefix[[t, c]] + x[[t, c]];
        }
    }
    let mut out = Array2::zeros((t_count, c_count));
    for t in 0..t_count {
        let mut start = t as isize - half;
        let mut end = t as isize + half + 1;
        if start < 0 {
            end -= start;
            start = 0;
        }
        if end > t_count as isize {
            start -= end - t_count as isize;
            end = t_count as isize;
        }
        let (s, e) = (start.max(0) as usize, end as usize);
        let n = (e - s) as f64;
        for c in 0..c_count {
            let mean = (prefix[[e, c]] - prefix[[s, c]]) / n;
            out[[t, c]] = x[[t, c]] - mean;
        }
    }
    Ok(features.with_values(out, features.kind()))
}
