//! Scoring detections against ground truth, and statistical diagnostics.

mod ks;
mod matching;
pub(crate) mod report;
mod welch;

pub use ks::{kolmogorov_q, ks_statistic, ks_uniform_test, KsResult};
pub use matching::{match_detections, MatchResult, MatchedDetection};
pub use report::{evaluate, BoxStats, EvalReport};
pub use welch::{welch_t_test_log_delays, WelchResult};
