use log::warn;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchResult {
    pub t: f64,
    pub df: f64,
    /// Two-sided.
    pub p_value: f64,
    /// Zero delays dropped from each group before taking logs.
    pub excluded: (usize, usize),
}

fn log_sample(delays: &[u64], group: &str) -> Result<(Vec<f64>, usize)> {
    let logs: Vec<f64> = delays
        .iter()
        .filter(|&&d| d > 0)
        .map(|&d| (d as f64).ln())
        .collect();
    let excluded = delays.len() - logs.len();
    if excluded > 0 {
        warn!("group {group}: excluded {excluded} zero delays from the log t-test");
    }
    if logs.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: logs.len(),
        });
    }
    Ok((logs, excluded))
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Welch's unequal-variance t-test on natural-log delays.
pub fn welch_t_test_log_delays(delays_a: &[u64], delays_b: &[u64]) -> Result<WelchResult> {
    let (a, ex_a) = log_sample(delays_a, "A")?;
    let (b, ex_b) = log_sample(delays_b, "B")?;
    welch_on_logs(&a, &b, (ex_a, ex_b))
}

fn welch_on_logs(a: &[f64], b: &[f64], excluded: (usize, usize)) -> Result<WelchResult> {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let (sa, sb) = (va / na, vb / nb);
    let se2 = sa + sb;
    let diff = ma - mb;
    if se2 == 0.0 {
        let (t, p_value) = if diff == 0.0 {
            (0.0, 1.0)
        } else {
            (diff.signum() * f64::INFINITY, 0.0)
        };
        return Ok(WelchResult {
            t,
            df: na + nb - 2.0,
            p_value,
            excluded,
        });
    }
    let t = diff / se2.sqrt();
    let df = se2 * se2 / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    let dist = StudentsT::new(0.0, 1.0, df)
        .map_err(|e| Error::InvalidConfig(format!("t distribution: {e}")))?;
    let p_value = (2.0 * dist.sf(t.abs())).min(1.0);
    Ok(WelchResult {
        t,
        df,
        p_value,
        excluded,
    })
}
