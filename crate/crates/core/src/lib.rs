//! Dereverberation workbench built around weighted prediction error (WPE).
//!
//! The crate is organised by subsystem:
//!
//! * [`signal`]: time-domain containers, WAV I/O and an invertible STFT.
//! * [`room`]: RIR synthesis, early/late splitting, convolution and noise mixing.
//! * [`wpe`]: delayed linear prediction, PSD sources, iterative WPE and the
//!   dual-channel virtual-channel variant.
//! * [`features`]: log-mel energies, MFCCs, sliding-window mean subtraction,
//!   loss functionals and oracle quality metrics.
//! * [`asv`]: cosine trial scoring, EER, minDCF and DET points.
//!
//! Everything runs at 16 kHz and in `f64`.

pub mod asv;
pub mod error;
pub mod features;
pub mod room;
pub mod signal;
pub mod wpe;

pub use error::{Error, Result};
pub use num_complex::Complex64;
