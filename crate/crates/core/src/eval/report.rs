use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::ks::{ks_uniform_test, KsResult};
use super::matching::{match_detections, MatchResult};

/// Box-plot summary; whiskers reach the most extreme data within 1.5 IQR.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxStats {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub mean: f64,
    pub q3: f64,
    pub max: f64,
    pub lower_whisker: f64,
    pub upper_whisker: f64,
}

/// Linear-interpolation quantile of an ascending slice.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

impl BoxStats {
    pub fn from_values(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let (q1, q3) = (quantile(&v, 0.25), quantile(&v, 0.75));
        let iqr = q3 - q1;
        let (lo_fence, hi_fence) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
        Some(Self {
            min: v[0],
            q1,
            median: quantile(&v, 0.5),
            mean: v.iter().sum::<f64>() / v.len() as f64,
            q3,
            max: v[v.len() - 1],
            lower_whisker: v.iter().copied().find(|&x| x >= lo_fence).unwrap_or(v[0]),
            upper_whisker: v
                .iter()
                .rev()
                .copied()
                .find(|&x| x <= hi_fence)
                .unwrap_or(v[v.len() - 1]),
        })
    }
}

/// Median of a slice (NaN when empty).
pub(crate) fn median(values: &[f64]) -> f64 {
    BoxStats::from_values(values).map_or(f64::NAN, |b| b.median)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub detections: usize,
    pub correct: usize,
    pub false_alarms: usize,
    pub missed: usize,
    /// 1 when there are no detections.
    pub precision: f64,
    /// 1 when there are no true changes.
    pub recall: f64,
    pub delays: Vec<u64>,
    pub delay_stats: Option<BoxStats>,
    /// Uniformity of the run's p-values; absent for fewer than 5 values.
    pub ks: Option<KsResult>,
    pub matches: MatchResult,
}

/// Score one run.
pub fn evaluate(
    detections: &[u64],
    true_changes: &[u64],
    stream_len: u64,
    p_values: &[f64],
) -> EvalReport {
    let matches = match_detections(detections, true_changes, stream_len);
    let correct = matches.correct.len();
    let delays = matches.delays();
    let as_f64: Vec<f64> = delays.iter().map(|&d| d as f64).collect();
    EvalReport {
        detections: detections.len(),
        correct,
        false_alarms: matches.false_alarms.len(),
        missed: matches.missed.len(),
        precision: if detections.is_empty() {
            1.0
        } else {
            correct as f64 / detections.len() as f64
        },
        recall: if true_changes.is_empty() {
            1.0
        } else {
            correct as f64 / true_changes.len() as f64
        },
        delay_stats: BoxStats::from_values(&as_f64),
        delays,
        ks: ks_uniform_test(p_values).ok(),
        matches,
    }
}

impl EvalReport {
    pub fn mean_delay(&self) -> f64 {
        self.delay_stats.map_or(f64::NAN, |s| s.mean)
    }

    pub fn median_delay(&self) -> f64 {
        self.delay_stats.map_or(f64::NAN, |s| s.median)
    }

    /// Flat `key = value` rendering, one pair per line.
    pub fn to_key_value(&self) -> String {
        let mut s = String::new();
        let join = |v: &[u64]| v.iter().map(u64::to_string).collect::<Vec<_>>().join(",");
        let _ = writeln!(s, "detections = {}", self.detections);
        let _ = writeln!(s, "correct = {}", self.correct);
        let _ = writeln!(s, "false_alarms = {}", self.false_alarms);
        let _ = writeln!(s, "missed = {}", self.missed);
        let _ = writeln!(s, "precision = {}", self.precision);
        let _ = writeln!(s, "recall = {}", self.recall);
        let _ = writeln!(s, "delays = {}", join(&self.delays));
        if let Some(b) = &self.delay_stats {
            for (k, v) in [
                ("delay_min", b.min),
                ("delay_q1", b.q1),
                ("delay_median", b.median),
                ("delay_mean", b.mean),
                ("delay_q3", b.q3),
                ("delay_max", b.max),
                ("delay_lower_whisker", b.lower_whisker),
                ("delay_upper_whisker", b.upper_whisker),
            ] {
                let _ = writeln!(s, "{k} = {v}");
            }
        }
        if let Some(ks) = &self.ks {
            let _ = writeln!(s, "ks_statistic = {}", ks.statistic);
            let _ = writeln!(s, "ks_p_value = {}", ks.p_value);
        }
        let correct: Vec<u64> = self.matches.correct.iter().map(|m| m.detection).collect();
        let _ = writeln!(s, "correct_detections = {}", join(&correct));
        let _ = writeln!(
            s,
            "false_alarm_detections = {}",
            join(&self.matches.false_alarms)
        );
        let _ = writeln!(s, "missed_changes = {}", join(&self.matches.missed));
        s
    }
}
