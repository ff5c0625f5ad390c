//! Acoustic features, training-loss functionals and oracle quality metrics.

mod embedding;
mod loss;
mod mel;
mod metrics;
mod swms;

pub use embedding::{
    load_embeddings, parse_embeddings, save_embeddings, toy_embedding, write_embeddings,
    EmbeddingProvider, EmbeddingVector, ToyEmbedder, EMBEDDING_DIM,
};
pub use loss::{
    composite_losses, l1_loss, l2_loss, mfcc_mae, ncs_loss, Composite, CompositeInputs,
    CompositeLosses, LossWeights,
};
pub use mel::{log_mfbe, mel_to_hz, hz_to_mel, mfcc, MelFilterbank, DEFAULT_BANDS, DEFAULT_MFCC, LOG_FLOOR};
pub use metrics::{log_spectral_distance, oracle_snr, residual_reverb_snr, SNR_CAP_DB};
pub use swms::{swms, swms_window_frames, DEFAULT_SWMS_SECONDS};

use ndarray::Array2;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeatureKind {
    LogMfbe,
    Mfcc,
    Lps,
}

/// Real-valued features indexed `(frame, coefficient)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    values: Array2<f64>,
    kind: FeatureKind,
    /// Mel bands the features were derived from (bins for LPS).
    pub bands: usize,
    pub fft_len: usize,
    pub sample_rate: u32,
    /// Seconds between frames.
    pub frame_shift: f64,
}

impl FeatureMatrix {
    pub fn new(
        values: Array2<f64>,
        kind: FeatureKind,
        bands: usize,
        fft_len: usize,
        sample_rate: u32,
        frame_shift: f64,
    ) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::format("feature values must be finite"));
        }
        if !(frame_shift > 0.0) {
            return Err(Error::config("frame shift must be positive"));
        }
        Ok(Self {
            values,
            kind,
            bands,
            fft_len,
            sample_rate,
            frame_shift,
        })
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn into_values(self) -> Array2<f64> {
        self.values
    }

    pub fn kind(&self) -> FeatureKind {
        self.kind
    }

    pub fn num_frames(&self) -> usize {
        self.values.nrows()
    }

    pub fn num_coeffs(&self) -> usize {
        self.values.ncols()
    }

    pub(crate) fn with_values(&self, values: Array2<f64>, kind: FeatureKind) -> Self {
        Self {
            values,
            kind,
            ..self.clone()
        }
    }
}

/// Natural-log power spectrum of a mono spectrogram, floored like the
/// filterbank energies.
pub fn lps(spec: &crate::signal::Spectrogram) -> Result<FeatureMatrix> {
    if spec.num_channels() != 1 {
        return Err(Error::config("log-power features need a mono spectrogram"));
    }
    let values = spec
        .data()
        .index_axis(ndarray::Axis(0), 0)
        .mapv(|z| z.norm_sqr().max(LOG_FLOOR).ln());
    FeatureMatrix::new(
        values,
        FeatureKind::Lps,
        spec.num_bins(),
        spec.config().fft_len,
        spec.sample_rate(),
        spec.config().hop_len as f64 / spec.sample_rate() as f64,
    )
}
