use std::collections::VecDeque;

use super::{sq_dist, ProviderError, StrangenessProvider, MISSING_OTHER_SENTINEL};
use crate::types::LabeledPoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KnnProviderConfig {
    /// Neighbors per class, at least 1.
    pub k: usize,
}

impl Default for KnnProviderConfig {
    fn default() -> Self {
        Self { k: 1 }
    }
}

/// Ratio score from ascending same-label and other-label neighbor distances.
fn ratio(same: &[f64], other: &[f64]) -> f64 {
    if same.is_empty() {
        return 0.0;
    }
    if other.is_empty() {
        return MISSING_OTHER_SENTINEL;
    }
    let num: f64 = same.iter().sum();
    let den: f64 = other.iter().sum();
    if num == 0.0 {
        0.0
    } else if den == 0.0 {
        MISSING_OTHER_SENTINEL
    } else {
        num / den
    }
}

/// Keep the `k` smallest values of `list` in ascending order after adding `d`.
fn insert_bounded(list: &mut Vec<f64>, d: f64, k: usize) {
    let pos = list.partition_point(|&x| x <= d);
    if pos < k {
        list.insert(pos, d);
        list.truncate(k);
    }
}

/// Nearest-neighbor ratio strangeness over the whole bag.
///
/// For each point: the sum of Euclidean distances to its `k` nearest
/// same-label points divided by the sum of distances to its `k` nearest
/// other-label points. No same-label neighbor scores 0; no other-label
/// neighbor scores [`MISSING_OTHER_SENTINEL`].
pub fn knn_strangeness(bag: &[LabeledPoint], cfg: &KnnProviderConfig) -> Vec<f64> {
    let k = cfg.k.max(1);
    (0..bag.len())
        .map(|i| {
            let (same, other) = neighbor_lists(bag, i, k);
            ratio(&same, &other)
        })
        .collect()
}

fn neighbor_lists(bag: &[LabeledPoint], i: usize, k: usize) -> (Vec<f64>, Vec<f64>) {
    let mut same = Vec::with_capacity(k + 1);
    let mut other = Vec::with_capacity(k + 1);
    let pi = &bag[i];
    for (j, pj) in bag.iter().enumerate() {
        if j == i {
            continue;
        }
        let d = sq_dist(&pi.features, &pj.features).sqrt();
        if pj.label == pi.label {
            insert_bounded(&mut same, d, k);
        } else {
            insert_bounded(&mut other, d, k);
        }
    }
    (same, other)
}

/// Provider that recomputes [`knn_strangeness`] from scratch on every call.
#[derive(Debug, Clone, Copy, Default)]
pub struct KnnBatch(pub KnnProviderConfig);

impl StrangenessProvider for KnnBatch {
    fn scores(&mut self, bag: &[LabeledPoint]) -> Result<Vec<f64>, ProviderError> {
        Ok(knn_strangeness(bag, &self.0))
    }
}

#[derive(Debug, Clone)]
struct Entry {
    id: u64,
    same: Vec<(f64, u64)>,
    other: Vec<(f64, u64)>,
    stale: bool,
}

impl Entry {
    fn score(&self) -> f64 {
        let same: Vec<f64> = self.same.iter().map(|e| e.0).collect();
        let other: Vec<f64> = self.other.iter().map(|e| e.0).collect();
        ratio(&same, &other)
    }

    fn references(&self, id: u64) -> bool {
        self.same.iter().chain(&self.other).any(|e| e.1 == id)
    }
}

fn insert_tagged(list: &mut Vec<(f64, u64)>, d: f64, id: u64, k: usize) {
    let pos = list.partition_point(|&(x, _)| x <= d);
    if pos < k {
        list.insert(pos, (d, id));
        list.truncate(k);
    }
}

#[derive(Debug, Clone)]
struct Pending {
    replaced: Vec<(usize, Entry)>,
    entry: Entry,
}

/// [`knn_strangeness`] with per-point neighbor lists cached across steps.
///
/// Each arrival costs one distance per retained point instead of a full
/// pairwise recomputation. Scores are bit-identical to the batch function.
#[derive(Debug, Clone)]
pub struct IncrementalKnn {
    cfg: KnnProviderConfig,
    entries: VecDeque<Entry>,
    pending: Option<Pending>,
    next_id: u64,
}

impl IncrementalKnn {
    pub fn new(cfg: KnnProviderConfig) -> Self {
        Self {
            cfg: KnnProviderConfig { k: cfg.k.max(1) },
            entries: VecDeque::new(),
            pending: None,
            next_id: 0,
        }
    }

    fn fresh_id(&mut self) -> u64 {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    fn rebuild_entry(&self, history: &[LabeledPoint], i: usize) -> Entry {
        let k = self.cfg.k;
        let mut e = Entry {
            id: self.entries[i].id,
            same: Vec::with_capacity(k + 1),
            other: Vec::with_capacity(k + 1),
            stale: false,
        };
        for (j, pj) in history.iter().enumerate() {
            if j == i {
                continue;
            }
            let d = sq_dist(&history[i].features, &pj.features).sqrt();
            let id = self.entries[j].id;
            if pj.label == history[i].label {
                insert_tagged(&mut e.same, d, id, k);
            } else {
                insert_tagged(&mut e.other, d, id, k);
            }
        }
        e
    }

    /// Bring the cache in line with `history` (the bag without the new point).
    fn sync(&mut self, history: &[LabeledPoint]) {
        if self.entries.len() != history.len() {
            self.entries.clear();
            for _ in history {
                let id = self.fresh_id();
                self.entries.push_back(Entry {
                    id,
                    same: Vec::new(),
                    other: Vec::new(),
                    stale: true,
                });
            }
        }
        for i in 0..self.entries.len() {
            if self.entries[i].stale {
                self.entries[i] = self.rebuild_entry(history, i);
            }
        }
    }
}

impl StrangenessProvider for IncrementalKnn {
    fn scores(&mut self, bag: &[LabeledPoint]) -> Result<Vec<f64>, ProviderError> {
        let Some((newest, history)) = bag.split_last() else {
            return Ok(Vec::new());
        };
        self.pending = None;
        self.sync(history);
        let k = self.cfg.k;
        let new_id = self.fresh_id();
        let mut candidate = Entry {
            id: new_id,
            same: Vec::with_capacity(k + 1),
            other: Vec::with_capacity(k + 1),
            stale: false,
        };
        let mut replaced = Vec::new();
        let mut scores = Vec::with_capacity(bag.len());
        for (i, (entry, point)) in self.entries.iter().zip(history).enumerate() {
            let d = sq_dist(&point.features, &newest.features).sqrt();
            let same_label = point.label == newest.label;
            if same_label {
                insert_tagged(&mut candidate.same, d, entry.id, k);
            } else {
                insert_tagged(&mut candidate.other, d, entry.id, k);
            }
            let list = if same_label {
                &entry.same
            } else {
                &entry.other
            };
            if list.partition_point(|&(x, _)| x <= d) < k {
                let mut updated = entry.clone();
                let target = if same_label {
                    &mut updated.same
                } else {
                    &mut updated.other
                };
                insert_tagged(target, d, new_id, k);
                scores.push(updated.score());
                replaced.push((i, updated));
            } else {
                scores.push(entry.score());
            }
        }
        scores.push(candidate.score());
        self.pending = Some(Pending {
            replaced,
            entry: candidate,
        });
        Ok(scores)
    }

    fn commit(&mut self) {
        if let Some(pending) = self.pending.take() {
            for (i, entry) in pending.replaced {
                self.entries[i] = entry;
            }
            self.entries.push_back(pending.entry);
        }
    }

    fn evict_front(&mut self) {
        self.pending = None;
        if let Some(gone) = self.entries.pop_front() {
            for e in self.entries.iter_mut() {
                if e.references(gone.id) {
                    e.stale = true;
                }
            }
        }
    }

    fn reset(&mut self) {
        self.entries.clear();
        self.pending = None;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(x: f64, label: i32) -> LabeledPoint {
        LabeledPoint::new(vec![x], label)
    }

    #[test]
    fn no_same_label_neighbor_scores_zero() {
        let bag = [pt(0.0, 1), pt(1.0, -1)];
        assert_eq!(
            knn_strangeness(&bag, &KnnProviderConfig::default()),
            vec![0.0, 0.0]
        );
    }

    #[test]
    fn hand_computed_ratio() {
        let bag = [pt(0.0, 1), pt(0.1, 1), pt(5.0, -1)];
        let s = knn_strangeness(&bag, &KnnProviderConfig::default());
        assert!((s[0] - 0.02).abs() < 1e-12);
        assert!((s[1] - 0.1 / 4.9).abs() < 1e-12);
        // (5, -1) has no other -1 point: empty numerator.
        assert_eq!(s[2], 0.0);
    }

    #[test]
    fn single_class_bag_gets_sentinel() {
        let bag = [pt(0.0, 1), pt(0.5, 1), pt(2.0, 1)];
        let s = knn_strangeness(&bag, &KnnProviderConfig::default());
        assert!(s.iter().all(|&v| v == MISSING_OTHER_SENTINEL));
    }

    #[test]
    fn duplicate_is_least_strange() {
        let bag = [pt(0.3, 1), pt(0.3, 1), pt(0.9, 1), pt(0.0, -1)];
        let s = knn_strangeness(&bag, &KnnProviderConfig::default());
        assert_eq!(s[0], 0.0);
        assert_eq!(s[1], 0.0);
        assert!(s[2] > 0.0);
    }

    #[test]
    fn k_sums_multiple_neighbors() {
        let bag = [
            pt(0.0, 1),
            pt(1.0, 1),
            pt(3.0, 1),
            pt(-2.0, -1),
            pt(-4.0, -1),
        ];
        let s = knn_strangeness(&bag, &KnnProviderConfig { k: 2 });
        assert!((s[0] - (1.0 + 3.0) / (2.0 + 4.0)).abs() < 1e-12);
    }

    #[derive(Debug, Clone)]
    enum Op {
        Push(f64, f64, bool),
        Evict,
        Reset,
    }

    fn op() -> impl Strategy<Value = Op> {
        prop_oneof![
            8 => (-1.0f64..1.0, -1.0f64..1.0, any::<bool>()).prop_map(|(a, b, l)| Op::Push(a, b, l)),
            1 => Just(Op::Evict),
            1 => Just(Op::Reset),
        ]
    }

    proptest! {
        #[test]
        fn incremental_matches_batch(
            ops in prop::collection::vec(op(), 1..80),
            k in 1usize..4,
        ) {
            let cfg = KnnProviderConfig { k };
            let mut inc = IncrementalKnn::new(cfg);
            let mut bag: Vec<LabeledPoint> = Vec::new();
            for op in ops {
                match op {
                    Op::Push(a, b, l) => {
                        bag.push(LabeledPoint::new(vec![a, b], if l { 1 } else { -1 }));
                        let got = inc.scores(&bag).unwrap();
                        prop_assert_eq!(got, knn_strangeness(&bag, &cfg));
                        inc.commit();
                    }
                    Op::Evict => {
                        if !bag.is_empty() {
                            bag.remove(0);
                            inc.evict_front();
                        }
                    }
                    Op::Reset => {
                        bag.clear();
                        inc.reset();
                    }
                }
            }
        }

        #[test]
        fn permutation_equivariant(
            raw in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0, any::<bool>()), 1..30),
            seed in any::<u64>(),
        ) {
            use rand::seq::SliceRandom;
            let bag: Vec<LabeledPoint> = raw
                .iter()
                .map(|&(a, b, l)| LabeledPoint::new(vec![a, b], if l { 1 } else { -1 }))
                .collect();
            let mut order: Vec<usize> = (0..bag.len()).collect();
            order.shuffle(&mut crate::rng::rng_from_seed(seed));
            let permuted: Vec<LabeledPoint> = order.iter().map(|&i| bag[i].clone()).collect();
            let cfg = KnnProviderConfig::default();
            let base = knn_strangeness(&bag, &cfg);
            let perm = knn_strangeness(&permuted, &cfg);
            for (pos, &i) in order.iter().enumerate() {
                prop_assert_eq!(perm[pos], base[i]);
            }
        }
    }
}
