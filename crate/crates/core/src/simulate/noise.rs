use rand::seq::index;

use super::{check_noise, StreamSpec};
use crate::error::Result;
use crate::rng::rng_from_seed;

/// Negate the labels of exactly `round(pct / 100 * n)` distinct points
/// chosen uniformly without replacement. Change points are unchanged.
pub fn apply_label_noise(mut stream: StreamSpec, pct: f64, seed: u64) -> Result<StreamSpec> {
    check_noise(pct)?;
    let n = stream.points.len();
    let count = (pct / 100.0 * n as f64).round() as usize;
    if count == 0 {
        return Ok(stream);
    }
    let mut rng = rng_from_seed(seed);
    for i in index::sample(&mut rng, n, count) {
        stream.points[i].label = -stream.points[i].label;
    }
    Ok(stream)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::LabeledPoint;

    fn stream(n: usize) -> StreamSpec {
        let pts = (0..n)
            .map(|i| LabeledPoint::new(vec![i as f64], if i % 3 == 0 { -1 } else { 1 }))
            .collect();
        StreamSpec::new(pts, vec![(n / 2) as u64 + 1]).unwrap()
    }

    #[test]
    fn zero_noise_is_identity() {
        let s = stream(100);
        assert_eq!(apply_label_noise(s.clone(), 0.0, 4).unwrap(), s);
    }

    #[test]
    fn exact_flip_count() {
        let s = stream(100_000);
        let noisy = apply_label_noise(s.clone(), 5.0, 4).unwrap();
        let flipped = s
            .points
            .iter()
            .zip(&noisy.points)
            .filter(|(a, b)| a.label != b.label)
            .count();
        assert_eq!(flipped, 5_000);
        assert_eq!(noisy.true_change_points, s.true_change_points);
    }

    #[test]
    fn same_seed_twice_restores() {
        let s = stream(1000);
        let twice =
            apply_label_noise(apply_label_noise(s.clone(), 12.5, 9).unwrap(), 12.5, 9).unwrap();
        assert_eq!(twice, s);
    }

    #[test]
    fn out_of_range_pct_rejected() {
        assert!(apply_label_noise(stream(10), 50.0, 0).is_err());
        assert!(apply_label_noise(stream(10), -1.0, 0).is_err());
    }
}
