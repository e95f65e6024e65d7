//! Threshold and delay design from the SPRT view of the martingale test.
//!
//! Treating the martingale as a one-sided likelihood-ratio test with the
//! acceptance boundary at zero gives `lambda <= (1 - beta) / alpha`, and the
//! average sample number gives the expected detection delay
//! `(1 - beta) ln(lambda) / E[ln(eps p^(eps - 1))]`.

use crate::error::{Error, Result};
use crate::martingale::log_update_factor;
use crate::types::PValue;

/// Size and type-II error probability of the martingale test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestDesign {
    alpha: f64,
    beta: f64,
}

impl TestDesign {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha must lie in (0, 1), got {alpha}"
            )));
        }
        if !(0.0..1.0).contains(&beta) {
            return Err(Error::InvalidConfig(format!(
                "beta must lie in [0, 1), got {beta}"
            )));
        }
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn power(&self) -> f64 {
        1.0 - self.beta
    }
}

/// Largest threshold consistent with the design: `(1 - beta) / alpha`.
pub fn threshold_from_design(design: &TestDesign) -> f64 {
    design.power() / design.alpha()
}

/// Doob's maximal-inequality bound on the false-alarm probability of a
/// unit-mean nonnegative martingale: `min(1, 1 / lambda)`.
pub fn doob_false_alarm_bound(lambda: f64) -> f64 {
    if lambda <= 1.0 {
        1.0
    } else {
        1.0 / lambda
    }
}

/// Expected number of post-change points before the martingale crosses
/// `lambda`, given p-values observed (or hypothesized) after a change.
///
/// Natural logarithms are used throughout; any consistent base cancels.
pub fn estimate_mean_delay(
    lambda: f64,
    beta: f64,
    post_change_p: &[PValue],
    epsilon: f64,
) -> Result<f64> {
    if !(lambda >= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "lambda must be at least 1, got {lambda}"
        )));
    }
    if !(0.0..1.0).contains(&beta) {
        return Err(Error::InvalidConfig(format!(
            "beta must lie in [0, 1), got {beta}"
        )));
    }
    if post_change_p.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    let mut total = 0.0;
    for &p in post_change_p {
        total += log_update_factor(p, epsilon)?;
    }
    let mean_log_factor = total / post_change_p.len() as f64;
    // The crossover p-value itself evaluates to a tiny nonzero mean in floating
    // point; anything this close to zero means no drift.
    if mean_log_factor <= 1e-6 {
        return Err(Error::UndefinedDelay(mean_log_factor));
    }
    Ok((1.0 - beta) * lambda.ln() / mean_log_factor)
}
