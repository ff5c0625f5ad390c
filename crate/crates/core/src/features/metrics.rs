use super::LOG_FLOOR;
use crate::signal::{Spectrogram, TimeSignal};
use crate::{Error, Result};

/// Ceiling reported in place of an infinite SNR.
pub const SNR_CAP_DB: f64 = 120.0;

/// Log-spectral distance in dB: root mean square over frames of the
/// per-frame RMS difference between `10 log10` power spectra.
pub fn log_spectral_distance(a: &Spectrogram, b: &Spectrogram) -> Result<f64> {
    a.check_same_shape(b).map_err(|e| Error::config(e.to_string()))?;
    let (c_count, t_count, f_count) = a.data().dim();
    let db = |p: f64| 10.0 * p.max(LOG_FLOOR).log10();
    let mut acc = 0.0;
    for c in 0..c_count {
        for t in 0..t_count {
            let mut frame = 0.0;
            for f in 0..f_count {
                let d = db(a.data()[[c, t, f]].norm_sqr()) - db(b.data()[[c, t, f]].norm_sqr());
                frame += d * d;
            }
            acc += frame / f_count as f64;
        }
    }
    Ok((acc / (c_count * t_count) as f64).sqrt())
}

/// `10 log10(E_speech / E_residual)`, capped at [`SNR_CAP_DB`].
pub fn oracle_snr(speech: &TimeSignal, residual: &TimeSignal) -> Result<f64> {
    speech.check_compatible(residual)?;
    let es = speech.energy();
    if es == 0.0 {
        return Err(Error::degenerate("speech component has zero energy"));
    }
    let er = residual.energy();
    if er == 0.0 {
        return Ok(SNR_CAP_DB);
    }
    Ok((10.0 * (es / er).log10()).min(SNR_CAP_DB))
}

/// SNR of the target against everything else in `output`:
/// `oracle_snr(target, output − target)`.
pub fn residual_reverb_snr(output: &TimeSignal, target: &TimeSignal) -> Result<f64> {
    oracle_snr(target, &output.sub(target)?)
}
