//! Randomized conformal p-values and the randomized power martingale.
//!
//! Given strangeness scores `a_1..a_n` for the retained bag plus the new
//! point (last), the randomized p-value of the new point is
//!
//! ```text
//! p_n = (#{i : a_i > a_n} + theta * #{i : a_i = a_n}) / n
//! ```
//!
//! and the power martingale multiplies in `eps * p_n^(eps - 1)` per point.
//! The product is tracked as a sum of logs.

use rand::Rng;

use crate::error::{Error, Result};
use crate::types::PValue;

/// Default martingale exponent.
pub const DEFAULT_EPSILON: f64 = 0.92;

/// Bounds of the tie-breaking draw. Keeping theta away from zero keeps every
/// p-value strictly positive and every single update factor finite.
pub const THETA_MIN: f64 = 1e-6;
pub const THETA_MAX: f64 = 1.0 - 1e-6;

/// Draw the tie-breaking variable theta, uniform and clamped to
/// `[THETA_MIN, THETA_MAX]`.
pub fn draw_theta<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random::<f64>().clamp(THETA_MIN, THETA_MAX)
}

/// Randomized p-value of the last score in `scores` relative to the whole bag.
pub fn compute_p_value(scores: &[f64], theta: f64) -> Result<PValue> {
    let (&newest, _) = scores.split_last().ok_or(Error::EmptyBag)?;
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidTheta(theta));
    }
    let (mut greater, mut equal) = (0usize, 0usize);
    for &a in scores {
        if a > newest {
            greater += 1;
        } else if a == newest {
            equal += 1;
        }
    }
    let n = scores.len() as f64;
    PValue::new((greater as f64 + theta * equal as f64) / n)
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )))
    }
}

/// `ln(eps * p^(eps - 1))`, the log of one martingale update factor.
pub fn log_update_factor(p: PValue, epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    Ok(epsilon.ln() + (epsilon - 1.0) * p.get().ln())
}

/// `eps * p^(eps - 1)`, always at least `eps`.
pub fn martingale_update_factor(p: PValue, epsilon: f64) -> Result<f64> {
    log_update_factor(p, epsilon).map(f64::exp)
}

/// The p-value at which one update factor equals one: `eps^(1 / (1 - eps))`.
/// Smaller p-values grow the martingale, larger ones shrink it.
pub fn unit_factor_crossover(epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    Ok(epsilon.powf(1.0 / (1.0 - epsilon)))
}
