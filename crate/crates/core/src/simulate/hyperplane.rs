use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{
    apply_label_noise, check_noise, noise_seed, segment_change_points, segment_seed, StreamSpec,
};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use crate::types::{Label, LabeledPoint};

/// How each segment's weight vector is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RotationMode {
    /// `w = [cos r, sin r]`, `r ~ U[-pi/3, pi/3]`.
    Restricted,
    /// `w = [cos r, sin r]`, `r ~ U[-pi, pi]`.
    Arbitrary,
    /// Each `w_i ~ U[-1, 1]`.
    RandomWeights,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperplaneConfig {
    pub dim: usize,
    pub offset: f64,
    pub segment_len: usize,
    pub num_segments: usize,
    pub rotation: RotationMode,
    pub noise_pct: f64,
}

impl Default for HyperplaneConfig {
    fn default() -> Self {
        Self {
            dim: 2,
            offset: 0.0,
            segment_len: 1000,
            num_segments: 100,
            rotation: RotationMode::Arbitrary,
            noise_pct: 0.0,
        }
    }
}

impl HyperplaneConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::InvalidConfig(format!(
                "hyperplane streams need dim >= 2, got {}",
                self.dim
            )));
        }
        if self.segment_len == 0 || self.num_segments == 0 {
            return Err(Error::InvalidConfig(
                "segment length and count must be positive".into(),
            ));
        }
        if self.rotation != RotationMode::RandomWeights && self.dim != 2 {
            return Err(Error::InvalidConfig(format!(
                "angle rotation is only defined for dim 2, got {}",
                self.dim
            )));
        }
        check_noise(self.noise_pct)
    }
}

/// `+1` when `w . x >= c`, else `-1`.
pub fn hyperplane_label(x: &[f64], w: &[f64], c: f64) -> Label {
    let dot: f64 = x.iter().zip(w).map(|(a, b)| a * b).sum();
    if dot >= c {
        1
    } else {
        -1
    }
}

fn draw_weights<R: Rng>(rng: &mut R, cfg: &HyperplaneConfig) -> Vec<f64> {
    let angle = |rng: &mut R, half: f64| {
        let r: f64 = rng.random_range(-half..=half);
        vec![r.cos(), r.sin()]
    };
    match cfg.rotation {
        RotationMode::Restricted => angle(rng, PI / 3.0),
        RotationMode::Arbitrary => angle(rng, PI),
        RotationMode::RandomWeights => (0..cfg.dim).map(|_| rng.random_range(-1.0..=1.0)).collect(),
    }
}

/// Segments of uniform points in `[-1, 1]^m`, each labeled by a freshly
/// drawn hyperplane, followed by label noise.
pub fn generate_hyperplane_stream(cfg: &HyperplaneConfig, seed: u64) -> Result<StreamSpec> {
    cfg.validate()?;
    let mut points = Vec::with_capacity(cfg.segment_len * cfg.num_segments);
    for segment in 0..cfg.num_segments {
        let mut rng = rng_from_seed(segment_seed(seed, segment));
        let w = draw_weights(&mut rng, cfg);
        for _ in 0..cfg.segment_len {
            let x: Vec<f64> = (0..cfg.dim).map(|_| rng.random_range(-1.0..=1.0)).collect();
            let label = hyperplane_label(&x, &w, cfg.offset);
            points.push(LabeledPoint::new(x, label));
        }
    }
    let spec = StreamSpec::new(
        points,
        segment_change_points(cfg.segment_len, cfg.num_segments),
    )?;
    apply_label_noise(spec, cfg.noise_pct, noise_seed(seed))
}

/// Weight vectors used for each segment; exposed for inspection and tests.
pub fn segment_weights(cfg: &HyperplaneConfig, seed: u64) -> Vec<Vec<f64>> {
    (0..cfg.num_segments)
        .map(|s| draw_weights(&mut rng_from_seed(segment_seed(seed, s)), cfg))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_examples() {
        assert_eq!(hyperplane_label(&[0.5, -0.3], &[1.0, 0.0], 0.0), 1);
        assert_eq!(hyperplane_label(&[0.25, 0.0], &[2.0, 7.0], 0.5), 1);
        assert_eq!(
            hyperplane_label(&[-0.2, 0.9], &[0.0f64.cos(), 0.0f64.sin()], 0.0),
            -1
        );
    }

    #[test]
    fn single_segment_has_no_changes() {
        let cfg = HyperplaneConfig {
            num_segments: 1,
            segment_len: 50,
            ..HyperplaneConfig::default()
        };
        assert!(generate_hyperplane_stream(&cfg, 1)
            .unwrap()
            .true_change_points
            .is_empty());
    }

    #[test]
    fn scenario_a_layout_and_rotation_bound() {
        let cfg = HyperplaneConfig {
            rotation: RotationMode::Restricted,
            ..HyperplaneConfig::default()
        };
        let spec = generate_hyperplane_stream(&cfg, 7).unwrap();
        assert_eq!(spec.len(), 100_000);
        assert_eq!(spec.true_change_points.len(), 99);
        assert_eq!(spec.true_change_points[..3], [1001, 2001, 3001]);
        let ws = segment_weights(&cfg, 7);
        for pair in ws.windows(2) {
            let a = pair[0][1].atan2(pair[0][0]);
            let b = pair[1][1].atan2(pair[1][0]);
            assert!((a - b).abs() <= 2.0 * PI / 3.0 + 1e-12);
        }
    }

    #[test]
    fn labels_follow_segment_hyperplane() {
        let cfg = HyperplaneConfig {
            dim: 10,
            rotation: RotationMode::RandomWeights,
            segment_len: 100,
            num_segments: 3,
            ..HyperplaneConfig::default()
        };
        let spec = generate_hyperplane_stream(&cfg, 3).unwrap();
        let ws = segment_weights(&cfg, 3);
        for (i, p) in spec.points.iter().enumerate() {
            assert!(p.features.iter().all(|v| (-1.0..=1.0).contains(v)));
            assert_eq!(p.label, hyperplane_label(&p.features, &ws[i / 100], 0.0));
        }
    }

    #[test]
    fn angle_modes_require_two_dims() {
        let cfg = HyperplaneConfig {
            dim: 3,
            ..HyperplaneConfig::default()
        };
        assert!(generate_hyperplane_stream(&cfg, 0).is_err());
    }

    #[test]
    fn seed_determinism() {
        let cfg = HyperplaneConfig {
            num_segments: 4,
            segment_len: 100,
            noise_pct: 5.0,
            ..HyperplaneConfig::default()
        };
        assert_eq!(
            generate_hyperplane_stream(&cfg, 99).unwrap(),
            generate_hyperplane_stream(&cfg, 99).unwrap()
        );
        assert_ne!(
            generate_hyperplane_stream(&cfg, 99).unwrap(),
            generate_hyperplane_stream(&cfg, 100).unwrap()
        );
    }
}
