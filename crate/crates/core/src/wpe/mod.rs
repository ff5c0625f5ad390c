//! Weighted prediction error dereverberation.
//!
//! A delayed linear predictor `G_f` is estimated per frequency bin from
//! PSD-weighted normal equations and its prediction of the late
//! reverberation is subtracted from the observation.

mod config;
mod filter;
mod psd;
mod solve;
mod stack;
mod virtual_channel;

pub use config::{PsdMode, WpeConfig, DEFAULT_DELAY, DEFAULT_DIAG_LOAD, DEFAULT_ITERATIONS,
    DEFAULT_PSD_FLOOR, DEFAULT_TAPS_SINGLE, DEFAULT_TAPS_VACE};
pub use filter::{
    accumulate_normal_equations, dereverberate, iterative_wpe, load_diagonal, vace_dereverberate,
    vace_wpe, wpe, wpe_apply, wpe_filter_estimate, LpFilterSet, NormalEquations,
};
pub use psd::{estimate_psd, PsdEstimate};
pub use solve::{cholesky_solve, solve_hermitian};
pub use stack::{build_delayed_stack, delayed_stack_for_bin};
pub use virtual_channel::{virtual_channel_source, VirtualChannel};
