use super::smo::{Kernel, SmoParams, SvmModel};
use super::{ProviderError, StrangenessProvider};
use crate::types::{label_set, LabeledPoint};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmProviderConfig {
    /// Gaussian kernel width; `None` means `1 / dim`.
    pub gamma: Option<f64>,
    pub c: f64,
    pub retrain_every: usize,
}

impl Default for SvmProviderConfig {
    fn default() -> Self {
        Self {
            gamma: None,
            c: 10.0,
            retrain_every: 1,
        }
    }
}

impl SvmProviderConfig {
    pub fn resolved(&self, dim: usize) -> Self {
        Self {
            gamma: Some(self.gamma.unwrap_or(1.0 / dim.max(1) as f64)),
            ..*self
        }
    }

    fn kernel(&self, dim: usize) -> Kernel {
        Kernel::Gaussian {
            gamma: self.resolved(dim).gamma.unwrap_or(1.0),
        }
    }

    fn smo(&self) -> SmoParams {
        SmoParams {
            c: self.c,
            ..SmoParams::default()
        }
    }
}

/// Margin-based strangeness `-y_i f(x_i)`, shifted so the smallest is zero.
fn margin_scores(model: &SvmModel, bag: &[LabeledPoint]) -> Vec<f64> {
    let raw: Vec<f64> = bag
        .iter()
        .map(|p| {
            let y = if p.label > 0 { 1.0 } else { -1.0 };
            -y * model.decision(&p.features)
        })
        .collect();
    let min = raw.iter().copied().fold(f64::INFINITY, f64::min);
    raw.into_iter().map(|r| r - min).collect()
}

/// Fit on the bag in a canonical order so the model depends only on the
/// multiset of points, not on their arrival order.
fn fit(bag: &[LabeledPoint], cfg: &SvmProviderConfig) -> Result<SvmModel, ProviderError> {
    check_trainable(bag)?;
    let mut canonical: Vec<LabeledPoint> = bag.to_vec();
    canonical.sort_by(|a, b| {
        a.label.cmp(&b.label).then_with(|| {
            a.features
                .iter()
                .zip(&b.features)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    SvmModel::train(&canonical, cfg.kernel(bag[0].dim()), &cfg.smo())
}

fn check_trainable(bag: &[LabeledPoint]) -> Result<(), ProviderError> {
    if bag.len() < 2 || label_set(bag).len() < 2 {
        Err(ProviderError::Untrainable(
            "bag must contain both labels".into(),
        ))
    } else {
        Ok(())
    }
}

/// Train a Gaussian-kernel SVM on the bag and score every point by its
/// signed distance to the decision surface.
pub fn svm_strangeness(
    bag: &[LabeledPoint],
    cfg: &SvmProviderConfig,
) -> Result<Vec<f64>, ProviderError> {
    let model = fit(bag, cfg)?;
    Ok(margin_scores(&model, bag))
}

/// SVM strangeness with a cached model, retrained every `retrain_every`
/// calls since the last reset. Between retrains the whole bag, including the
/// new point, is scored against the cached model.
#[derive(Debug, Clone)]
pub struct SvmProvider {
    cfg: SvmProviderConfig,
    model: Option<SvmModel>,
    calls: u64,
}

impl SvmProvider {
    pub fn new(cfg: SvmProviderConfig) -> Self {
        Self {
            cfg: SvmProviderConfig {
                retrain_every: cfg.retrain_every.max(1),
                ..cfg
            },
            model: None,
            calls: 0,
        }
    }

    pub fn model(&self) -> Option<&SvmModel> {
        self.model.as_ref()
    }
}

impl StrangenessProvider for SvmProvider {
    fn scores(&mut self, bag: &[LabeledPoint]) -> Result<Vec<f64>, ProviderError> {
        self.calls += 1;
        let due = self.calls % self.cfg.retrain_every as u64 == 0;
        if due || self.model.is_none() {
            self.model = Some(fit(bag, &self.cfg)?);
        }
        let model = self.model.as_ref().expect("model trained above");
        Ok(margin_scores(model, bag))
    }

    fn reset(&mut self) {
        self.model = None;
        self.calls = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn clusters(n: usize, seed: u64) -> Vec<LabeledPoint> {
        let mut rng = crate::rng::rng_from_seed(seed);
        (0..n)
            .map(|i| {
                let label = if i % 2 == 0 { 1 } else { -1 };
                let cx = if label > 0 { 1.0 } else { -1.0 };
                LabeledPoint::new(
                    vec![
                        cx + rng.random_range(-0.3..0.3),
                        rng.random_range(-0.3..0.3),
                    ],
                    label,
                )
            })
            .collect()
    }

    #[test]
    fn scores_nonnegative_with_zero_minimum() {
        let bag = clusters(30, 1);
        let s = svm_strangeness(&bag, &SvmProviderConfig::default()).unwrap();
        assert!(s.iter().all(|&v| v >= 0.0));
        assert_eq!(s.iter().copied().fold(f64::INFINITY, f64::min), 0.0);
    }

    #[test]
    fn flipped_label_is_strangest() {
        let mut bag = clusters(40, 2);
        // A +1 point placed deep in the -1 cluster.
        bag.push(LabeledPoint::new(vec![-1.0, 0.0], 1));
        let s = svm_strangeness(&bag, &SvmProviderConfig::default()).unwrap();
        let last = *s.last().unwrap();
        assert!(s[..s.len() - 1].iter().all(|&v| v < last));
    }

    #[test]
    fn cluster_centre_less_strange_than_boundary() {
        let mut bag = clusters(30, 3);
        bag.push(LabeledPoint::new(vec![1.0, 0.0], 1));
        bag.push(LabeledPoint::new(vec![0.0, 0.0], 1));
        let s = svm_strangeness(&bag, &SvmProviderConfig::default()).unwrap();
        let n = s.len();
        assert!(s[n - 2] < s[n - 1]);
    }

    #[test]
    fn single_label_bag_untrainable() {
        let bag = vec![
            LabeledPoint::new(vec![0.0], 1),
            LabeledPoint::new(vec![1.0], 1),
        ];
        assert!(svm_strangeness(&bag, &SvmProviderConfig::default()).is_err());
        let mut provider = SvmProvider::new(SvmProviderConfig::default());
        assert!(provider.scores(&bag).is_err());
    }

    #[test]
    fn cadence_matches_every_step_training_on_due_indices() {
        let stream = clusters(24, 4);
        let mut every = SvmProvider::new(SvmProviderConfig::default());
        let mut third = SvmProvider::new(SvmProviderConfig {
            retrain_every: 3,
            ..SvmProviderConfig::default()
        });
        for n in 2..=stream.len() {
            let bag = &stream[..n];
            let a = every.scores(bag);
            let b = third.scores(bag);
            // Call index is n - 1 (first call at n = 2).
            if (n - 1) % 3 == 0 {
                assert_eq!(a.unwrap(), b.unwrap());
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn permutation_equivariant(seed in any::<u64>(), n in 6usize..24) {
            use rand::seq::SliceRandom;
            let bag = clusters(n, seed);
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut crate::rng::rng_from_seed(seed ^ 0xABCD));
            let permuted: Vec<LabeledPoint> = order.iter().map(|&i| bag[i].clone()).collect();
            let cfg = SvmProviderConfig::default();
            let base = svm_strangeness(&bag, &cfg).unwrap();
            let perm = svm_strangeness(&permuted, &cfg).unwrap();
            for (pos, &i) in order.iter().enumerate() {
                prop_assert_eq!(perm[pos], base[i]);
            }
        }
    }
}
