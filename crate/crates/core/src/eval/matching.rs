use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchedDetection {
    pub detection: u64,
    pub change: u64,
    pub delay: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchResult {
    pub correct: Vec<MatchedDetection>,
    pub false_alarms: Vec<u64>,
    pub missed: Vec<u64>,
}

impl MatchResult {
    pub fn delays(&self) -> Vec<u64> {
        self.correct.iter().map(|m| m.delay).collect()
    }
}

/// Pair detections with true change points.
///
/// A detection at `t` is correct when the latest true change `c <= t` has not
/// been matched yet; its delay is `t - c`. Any other detection, including a
/// second one in an already-matched segment or one past `stream_len`, is a
/// false alarm. Both inputs must be ascending.
pub fn match_detections(detections: &[u64], true_changes: &[u64], stream_len: u64) -> MatchResult {
    let mut matched = vec![false; true_changes.len()];
    let mut out = MatchResult::default();
    for &t in detections {
        let latest = true_changes.partition_point(|&c| c <= t);
        if t <= stream_len && latest > 0 && !matched[latest - 1] {
            matched[latest - 1] = true;
            let change = true_changes[latest - 1];
            out.correct.push(MatchedDetection {
                detection: t,
                change,
                delay: t - change,
            });
        } else {
            out.false_alarms.push(t);
        }
    }
    out.missed = true_changes
        .iter()
        .zip(&matched)
        .filter(|(_, &m)| !m)
        .map(|(&c, _)| c)
        .collect();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn labels_from_ringnorm_twonorm_run() {
        let changes: Vec<u64> = (1..=14).map(|i| 1000 * i + 1).chain([14_401]).collect();
        let dets = [1020, 2054, 2125];
        let m = match_detections(&dets, &changes, 14_800);
        assert_eq!(
            m.correct
                .iter()
                .map(|c| (c.detection, c.delay))
                .collect::<Vec<_>>(),
            vec![(1020, 19), (2054, 53)]
        );
        assert_eq!(m.false_alarms, vec![2125]);
    }

    #[test]
    fn full_caption_accounting() {
        let changes: Vec<u64> = (1..=14).map(|i| 1000 * i + 1).chain([14_401]).collect();
        let dets = [
            1020, 2054, 2125, 3017, 3410, 3614, 4051, 5030, 6036, 7023, 8018, 9019, 10014, 11031,
            12032, 13013, 14014, 14374,
        ];
        let m = match_detections(&dets, &changes, 14_800);
        assert_eq!(m.false_alarms, vec![2125, 3410, 3614, 14374]);
        assert_eq!(m.correct.len(), 14);
        assert_eq!(m.missed, vec![14_401]);
    }

    #[test]
    fn no_detections_and_early_detection() {
        let m = match_detections(&[], &[1001], 2000);
        assert!(m.correct.is_empty());
        assert_eq!(m.missed, vec![1001]);
        let m = match_detections(&[500], &[1001], 2000);
        assert_eq!(m.false_alarms, vec![500]);
    }

    fn sorted(v: Vec<u64>) -> Vec<u64> {
        let mut v = v;
        v.sort_unstable();
        v.dedup();
        v
    }

    proptest! {
        #[test]
        fn counts_and_shift_invariance(
            dets in prop::collection::vec(1u64..5000, 0..30).prop_map(sorted),
            changes in prop::collection::vec(2u64..5000, 0..10).prop_map(sorted),
            shift in 0u64..10_000,
        ) {
            let m = match_detections(&dets, &changes, 5000);
            prop_assert_eq!(m.correct.len() + m.false_alarms.len(), dets.len());
            prop_assert_eq!(m.correct.len() + m.missed.len(), changes.len());
            let mut seen = std::collections::BTreeSet::new();
            for c in &m.correct {
                prop_assert!(seen.insert(c.change));
            }
            let sd: Vec<u64> = dets.iter().map(|d| d + shift).collect();
            let sc: Vec<u64> = changes.iter().map(|c| c + shift).collect();
            let s = match_detections(&sd, &sc, 5000 + shift);
            prop_assert_eq!(s.delays(), m.delays());
            prop_assert_eq!(s.false_alarms.len(), m.false_alarms.len());
        }
    }
}
