//! Speaker-verification trial scoring and detection metrics.
//!
//! A trial is accepted when its score is at least the threshold.

mod metrics;
mod trials;

pub use metrics::{det_points, eer, min_dcf, write_det, DcfParams};
pub use trials::{
    cosine_score, cosine_scores, parse_scores, score_trials, write_scores, Label, ScoreLine, Trial,
    TrialList, TrialScoreSet,
};
