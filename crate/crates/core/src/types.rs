use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Class identifier. Binary streams use `-1` and `+1`.
pub type Label = i32;

/// One observation of a labeled stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledPoint {
    pub features: Vec<f64>,
    pub label: Label,
}

impl LabeledPoint {
    pub fn new(features: Vec<f64>, label: Label) -> Self {
        Self { features, label }
    }

    pub fn dim(&self) -> usize {
        self.features.len()
    }

    /// Copy of this point relabeled for a one-vs-rest channel.
    pub fn one_vs_rest(&self, class: Label) -> Self {
        Self {
            features: self.features.clone(),
            label: if self.label == class { 1 } else { -1 },
        }
    }
}

/// A randomized conformal p-value, always in `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct PValue(f64);

impl PValue {
    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 && value <= 1.0 {
            Ok(Self(value))
        } else {
            Err(Error::InvalidPValue(value))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for PValue {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl From<PValue> for f64 {
    fn from(p: PValue) -> f64 {
        p.0
    }
}

impl fmt::Display for PValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Sorted, deduplicated set of the labels present in `points`.
pub fn label_set(points: &[LabeledPoint]) -> Vec<Label> {
    let mut labels: Vec<Label> = points.iter().map(|p| p.label).collect();
    labels.sort_unstable();
    labels.dedup();
    labels
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pvalue_bounds() {
        assert!(PValue::new(1.0).is_ok());
        assert!(PValue::new(1e-300).is_ok());
        assert!(PValue::new(0.0).is_err());
        assert!(PValue::new(1.0 + 1e-12).is_err());
        assert!(PValue::new(f64::NAN).is_err());
    }

    #[test]
    fn one_vs_rest_relabels() {
        let p = LabeledPoint::new(vec![0.5], 3);
        assert_eq!(p.one_vs_rest(3).label, 1);
        assert_eq!(p.one_vs_rest(4).label, -1);
    }

    #[test]
    fn label_set_sorted_unique() {
        let pts: Vec<_> = [2, -1, 2, 0, -1]
            .iter()
            .map(|&l| LabeledPoint::new(vec![0.0], l))
            .collect();
        assert_eq!(label_set(&pts), vec![-1, 0, 2]);
    }
}
