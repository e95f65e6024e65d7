//! Nonconformity (strangeness) providers.
//!
//! A provider maps a bag of labeled points to one nonnegative score per
//! point; only the ordering of scores within a bag matters to the p-value.

mod knn;
mod smo;
mod svm;

pub use knn::{knn_strangeness, IncrementalKnn, KnnBatch, KnnProviderConfig};
pub use smo::{Kernel, SmoParams, SvmModel};
pub use svm::{svm_strangeness, SvmProvider, SvmProviderConfig};

use thiserror::Error;

use crate::types::LabeledPoint;

/// Score assigned when a point has no neighbor of another label. Half the
/// largest finite value, so it sorts above every genuine ratio.
pub const MISSING_OTHER_SENTINEL: f64 = f64::MAX / 2.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProviderError {
    #[error("provider cannot be trained on this bag: {0}")]
    Untrainable(String),
    #[error("solver did not converge within {0} iterations")]
    NotConverged(usize),
}

/// Computes strangeness scores for the detector's bag.
///
/// `scores` receives the retained bag followed by the newly arrived point and
/// returns one score per element, in order. The lifecycle hooks let a provider
/// keep caches aligned with the detector's bag: `commit` after the new point
/// was appended, `evict_front` after the oldest point was dropped, and `reset`
/// after the bag was cleared.
pub trait StrangenessProvider: Send {
    fn scores(&mut self, bag: &[LabeledPoint]) -> Result<Vec<f64>, ProviderError>;

    fn commit(&mut self) {}

    fn evict_front(&mut self) {}

    fn reset(&mut self) {}
}

impl<P: StrangenessProvider + ?Sized> StrangenessProvider for Box<P> {
    fn scores(&mut self, bag: &[LabeledPoint]) -> Result<Vec<f64>, ProviderError> {
        (**self).scores(bag)
    }

    fn commit(&mut self) {
        (**self).commit()
    }

    fn evict_front(&mut self) {
        (**self).evict_front()
    }

    fn reset(&mut self) {
        (**self).reset()
    }
}

/// Provider selection as exposed on the command line.
#[derive(Debug, Clone, PartialEq)]
pub enum ProviderConfig {
    Knn(KnnProviderConfig),
    Svm(SvmProviderConfig),
}

impl ProviderConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ProviderConfig::Knn(_) => "knn",
            ProviderConfig::Svm(_) => "svm",
        }
    }

    /// Build a fresh provider for a stream of the given feature dimension.
    pub fn build(&self, dim: usize) -> Box<dyn StrangenessProvider> {
        match self {
            ProviderConfig::Knn(cfg) => Box::new(IncrementalKnn::new(*cfg)),
            ProviderConfig::Svm(cfg) => Box::new(SvmProvider::new(cfg.resolved(dim))),
        }
    }
}

/// Squared Euclidean distance.
pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
