use super::{log_mfbe, mfcc, EmbeddingProvider, EmbeddingVector, DEFAULT_BANDS, DEFAULT_MFCC, LOG_FLOOR};
use crate::signal::{stft, Spectrogram, StftConfig, TimeSignal};
use crate::{Error, Result};

/// Scaling factors of the spectral, log-magnitude, waveform and cepstral
/// terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub eta: f64,
}

impl LossWeights {
    pub fn pretrain() -> Self {
        Self { alpha: 1.0, beta: 0.04, gamma: 5.0, eta: 0.0 }
    }

    pub fn finetune() -> Self {
        Self { alpha: 1.0, beta: 0.1, gamma: 5.0, eta: 0.2 }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta), ("gamma", self.gamma), ("eta", self.eta)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::config(format!("loss weight {name} must be finite and non-negative")));
            }
        }
        Ok(())
    }
}

fn check_pair(a_spec: &Spectrogram, b_spec: &Spectrogram, a_time: &TimeSignal, b_time: &TimeSignal) -> Result<()> {
    a_spec.check_same_shape(b_spec).map_err(|e| Error::config(e.to_string()))?;
    a_time.check_compatible(b_time).map_err(|e| Error::config(e.to_string()))
}

fn mean<I: ExactSizeIterator<Item = f64>>(it: I) -> f64 {
    let n = it.len();
    it.sum::<f64>() / n as f64
}

fn half_ln_power(z: num_complex::Complex64) -> f64 {
    0.5 * z.norm_sqr().max(LOG_FLOOR).ln()
}

/// `α·[MSE(Aʳ,Bʳ) + MSE(Aⁱ,Bⁱ)] + β·MSE(ln|A|, ln|B|) + γ·MAE(a, b)`.
pub fn l1_loss(
    a_spec: &Spectrogram,
    b_spec: &Spectrogram,
    a_time: &TimeSignal,
    b_time: &TimeSignal,
    w: &LossWeights,
) -> Result<f64> {
    w.validate()?;
    check_pair(a_spec, b_spec, a_time, b_time)?;
    let pairs = || a_spec.data().iter().zip(b_spec.data().iter());
    let mse_re = mean(pairs().map(|(a, b)| (a.re - b.re).powi(2)).collect::<Vec<_>>().into_iter());
    let mse_im = mean(pairs().map(|(a, b)| (a.im - b.im).powi(2)).collect::<Vec<_>>().into_iter());
    let mse_log = mean(
        pairs()
            .map(|(a, b)| (half_ln_power(*a) - half_ln_power(*b)).powi(2))
            .collect::<Vec<_>>()
            .into_iter(),
    );
    let samples: Vec<f64> = a_time
        .channels()
        .iter()
        .zip(b_time.channels())
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()))
        .collect();
    let mae = mean(samples.into_iter());
    Ok(w.alpha * (mse_re + mse_im) + w.beta * mse_log + w.gamma * mae)
}

/// Mean absolute difference of 20 MFCCs from the feature front-end.
pub fn mfcc_mae(a: &TimeSignal, b: &TimeSignal) -> Result<f64> {
    a.check_compatible(b).map_err(|e| Error::config(e.to_string()))?;
    let cepstra = |x: &TimeSignal| -> Result<_> {
        let spec = stft(x, &StftConfig::features())?;
        Ok(mfcc(&log_mfbe(&spec, DEFAULT_BANDS)?, DEFAULT_MFCC)?.into_values())
    };
    let (ca, cb) = (cepstra(a)?, cepstra(b)?);
    Ok(mean(ca.iter().zip(cb.iter()).map(|(x, y)| (x - y).abs()).collect::<Vec<_>>().into_iter()))
}

/// [`l1_loss`] plus `η·MAE` of the MFCCs.
pub fn l2_loss(
    a_spec: &Spectrogram,
    b_spec: &Spectrogram,
    a_time: &TimeSignal,
    b_time: &TimeSignal,
    w: &LossWeights,
) -> Result<f64> {
    let l1 = l1_loss(a_spec, b_spec, a_time, b_time, w)?;
    Ok(l1 + w.eta * mfcc_mae(a_time, b_time)?)
}

/// Negative cosine similarity.
pub fn ncs_loss(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::config(format!("embedding dimensions differ: {} vs {}", a.dim(), b.dim())));
    }
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (x, y) in a.values().iter().zip(b.values()) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Err(Error::degenerate("cosine similarity of a zero vector"));
    }
    Ok(-dot / (na * nb).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Composite {
    Pretrain,
    Finetune,
    Tso,
    Dr,
    DrTso,
}

/// Already-processed signals and their targets. `g_*` are virtual-channel
/// outputs, `v_*` dereverberated outputs for the named input.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompositeInputs<'a> {
    pub g_x1: Option<&'a TimeSignal>,
    pub g_y1: Option<&'a TimeSignal>,
    pub v_x1: Option<&'a TimeSignal>,
    pub v_y1: Option<&'a TimeSignal>,
    pub v_x1_early: Option<&'a TimeSignal>,
    pub v_y1_early: Option<&'a TimeSignal>,
    pub x1_late: Option<&'a TimeSignal>,
    pub x1_early: Option<&'a TimeSignal>,
    pub y1_early: Option<&'a TimeSignal>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CompositeLosses {
    pub l_pt: Option<f64>,
    pub l_ft: Option<f64>,
    pub l_tso: Option<f64>,
    pub l_dr: Option<f64>,
    pub l_dr_tso: Option<f64>,
}

fn need<'a>(s: Option<&'a TimeSignal>, name: &str, composite: &str) -> Result<&'a TimeSignal> {
    s.ok_or_else(|| Error::config(format!("{composite} needs the `{name}` signal")))
}

/// Evaluate the requested composite losses.
pub fn composite_losses(
    inputs: &CompositeInputs<'_>,
    requested: &[Composite],
    pretrain: &LossWeights,
    finetune: &LossWeights,
    stft_config: &StftConfig,
    embedder: &dyn EmbeddingProvider,
) -> Result<CompositeLosses> {
    let spectral = |a: &TimeSignal, b: &TimeSignal, w: &LossWeights, l2: bool| -> Result<f64> {
        let (sa, sb) = (stft(a, stft_config)?, stft(b, stft_config)?);
        if l2 {
            l2_loss(&sa, &sb, a, b, w)
        } else {
            l1_loss(&sa, &sb, a, b, w)
        }
    };
    let ncs = |a: &TimeSignal, b: &TimeSignal| -> Result<f64> { ncs_loss(&embedder.embed(a)?, &embedder.embed(b)?) };
    let wants = |c: Composite| requested.contains(&c);
    let mut out = CompositeLosses::default();

    if wants(Composite::Pretrain) {
        let late = need(inputs.x1_late, "x1_late", "pretraining loss")?;
        out.l_pt = Some(
            spectral(need(inputs.g_x1, "g_x1", "pretraining loss")?, late, pretrain, false)?
                + spectral(need(inputs.g_y1, "g_y1", "pretraining loss")?, late, pretrain, false)?,
        );
    }
    if wants(Composite::Finetune) {
        out.l_ft = Some(
            spectral(
                need(inputs.v_x1, "v_x1", "fine-tuning loss")?,
                need(inputs.x1_early, "x1_early", "fine-tuning loss")?,
                finetune,
                true,
            )? + spectral(
                need(inputs.v_y1, "v_y1", "fine-tuning loss")?,
                need(inputs.y1_early, "y1_early", "fine-tuning loss")?,
                finetune,
                true,
            )?,
        );
    }
    let both = wants(Composite::DrTso);
    if wants(Composite::Tso) || both {
        let target = need(inputs.x1_early, "x1_early", "TSO loss")?;
        out.l_tso = Some(
            ncs(need(inputs.v_x1, "v_x1", "TSO loss")?, target)?
                + ncs(need(inputs.v_y1, "v_y1", "TSO loss")?, target)?,
        );
    }
    if wants(Composite::Dr) || both {
        out.l_dr = Some(
            ncs(
                need(inputs.v_x1_early, "v_x1_early", "distortion regulariser")?,
                need(inputs.x1_early, "x1_early", "distortion regulariser")?,
            )? + ncs(
                need(inputs.v_y1_early, "v_y1_early", "distortion regulariser")?,
                need(inputs.y1_early, "y1_early", "distortion regulariser")?,
            )?,
        );
    }
    if both {
        out.l_dr_tso = Some(out.l_tso.unwrap() + out.l_dr.unwrap());
    }
    Ok(out)
}
