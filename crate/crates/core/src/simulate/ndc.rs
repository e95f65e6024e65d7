use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{
    apply_label_noise, check_noise, noise_seed, segment_change_points, segment_seed, StreamSpec,
};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use crate::types::LabeledPoint;

/// Normally distributed clusters generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NdcConfig {
    pub dim: usize,
    pub clusters_per_class: usize,
    pub segment_len: usize,
    pub num_segments: usize,
    pub noise_pct: f64,
    /// Cluster means are drawn from `U[-mean_range, mean_range]^m`.
    pub mean_range: f64,
    /// Per-dimension standard deviations are drawn from this interval.
    pub std_range: (f64, f64),
    /// Both classes share the same clusters, making labels independent of
    /// the features.
    pub shared_clusters: bool,
}

impl Default for NdcConfig {
    fn default() -> Self {
        Self {
            dim: 10,
            clusters_per_class: 2,
            segment_len: 1000,
            num_segments: 100,
            noise_pct: 5.0,
            mean_range: 2.0,
            std_range: (0.3, 1.0),
            shared_clusters: false,
        }
    }
}

impl NdcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.clusters_per_class == 0 {
            return Err(Error::InvalidConfig(
                "NDC needs dim >= 1 and at least one cluster per class".into(),
            ));
        }
        if self.segment_len == 0 || self.num_segments == 0 {
            return Err(Error::InvalidConfig(
                "segment length and count must be positive".into(),
            ));
        }
        let (lo, hi) = self.std_range;
        if !(lo > 0.0 && lo <= hi) || !(self.mean_range > 0.0) {
            return Err(Error::InvalidConfig(
                "NDC needs 0 < std_lo <= std_hi and a positive mean range".into(),
            ));
        }
        check_noise(self.noise_pct)
    }
}

struct Cluster {
    mean: Vec<f64>,
    std: Vec<f64>,
}

fn draw_clusters<R: Rng>(rng: &mut R, cfg: &NdcConfig) -> Vec<Cluster> {
    let (lo, hi) = cfg.std_range;
    (0..cfg.clusters_per_class)
        .map(|_| Cluster {
            mean: (0..cfg.dim)
                .map(|_| rng.random_range(-cfg.mean_range..=cfg.mean_range))
                .collect(),
            std: (0..cfg.dim).map(|_| rng.random_range(lo..=hi)).collect(),
        })
        .collect()
}

/// Rescale each dimension of `points` affinely onto `[-1, 1]`.
fn rescale(points: &mut [LabeledPoint], dim: usize) {
    for d in 0..dim {
        let (min, max) = points
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                (lo.min(p.features[d]), hi.max(p.features[d]))
            });
        let span = max - min;
        for p in points.iter_mut() {
            let v = &mut p.features[d];
            *v = if span > 0.0 {
                ((*v - min) / span * 2.0 - 1.0).clamp(-1.0, 1.0)
            } else {
                0.0
            };
        }
    }
}

/// Segments drawn from fresh Gaussian clusters per class, each segment
/// rescaled to `[-1, 1]` per dimension, followed by label noise.
pub fn generate_ndc_stream(cfg: &NdcConfig, seed: u64) -> Result<StreamSpec> {
    cfg.validate()?;
    let mut points = Vec::with_capacity(cfg.segment_len * cfg.num_segments);
    for segment in 0..cfg.num_segments {
        let mut rng = rng_from_seed(segment_seed(seed, segment));
        let positive = draw_clusters(&mut rng, cfg);
        let negative = if cfg.shared_clusters {
            None
        } else {
            Some(draw_clusters(&mut rng, cfg))
        };
        let mut seg: Vec<LabeledPoint> = (0..cfg.segment_len)
            .map(|_| {
                let label = if rng.random_bool(0.5) { 1 } else { -1 };
                let pool = match (&negative, label) {
                    (Some(neg), -1) => neg,
                    _ => &positive,
                };
                let c = &pool[rng.random_range(0..pool.len())];
                let x = c
                    .mean
                    .iter()
                    .zip(&c.std)
                    .map(|(m, s)| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        m + s * z
                    })
                    .collect();
                LabeledPoint::new(x, label)
            })
            .collect();
        rescale(&mut seg, cfg.dim);
        points.extend(seg);
    }
    let spec = StreamSpec::new(
        points,
        segment_change_points(cfg.segment_len, cfg.num_segments),
    )?;
    apply_label_noise(spec, cfg.noise_pct, noise_seed(seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_e_shape_and_range() {
        let cfg = NdcConfig::default();
        let spec = generate_ndc_stream(&cfg, 5).unwrap();
        assert_eq!(spec.len(), 100_000);
        assert_eq!(spec.true_change_points.len(), 99);
        assert_eq!(spec.true_change_points[0], 1001);
        assert!(spec
            .points
            .iter()
            .all(|p| p.dim() == 10 && p.features.iter().all(|v| (-1.0..=1.0).contains(v))));
        // Each segment touches both ends of every dimension.
        let seg = &spec.points[..1000];
        for d in 0..10 {
            assert!(seg.iter().any(|p| p.features[d] == -1.0));
            assert!(seg.iter().any(|p| p.features[d] == 1.0));
        }
    }

    #[test]
    fn shared_clusters_make_labels_uninformative() {
        let cfg = NdcConfig {
            clusters_per_class: 1,
            shared_clusters: true,
            num_segments: 1,
            segment_len: 4000,
            noise_pct: 0.0,
            ..NdcConfig::default()
        };
        let spec = generate_ndc_stream(&cfg, 1).unwrap();
        let mean = |label: i32| {
            let pts: Vec<_> = spec.points.iter().filter(|p| p.label == label).collect();
            pts.iter().map(|p| p.features[0]).sum::<f64>() / pts.len() as f64
        };
        assert!((mean(1) - mean(-1)).abs() < 0.05);
    }

    #[test]
    fn deterministic_and_validated() {
        let cfg = NdcConfig {
            num_segments: 2,
            segment_len: 100,
            ..NdcConfig::default()
        };
        assert_eq!(
            generate_ndc_stream(&cfg, 3).unwrap(),
            generate_ndc_stream(&cfg, 3).unwrap()
        );
        let bad = NdcConfig {
            clusters_per_class: 0,
            ..cfg
        };
        assert!(generate_ndc_stream(&bad, 3).is_err());
    }
}
