//! Declarative segment composition.
//!
//! A recipe names pools of labeled points and an ordered list of segments.
//! Each segment draws a number of points from one or more pools, without
//! replacement and in pool order, optionally relabels them, and optionally
//! shuffles the segment. Segment boundaries become the stream's change points.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use serde::Deserialize;

use super::load_labeled_csv;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};
use crate::simulate::StreamSpec;
use crate::types::{Label, LabeledPoint};

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Draw {
    pub pool: String,
    pub count: usize,
    /// Replace the drawn points' labels with this label.
    #[serde(default)]
    pub relabel: Option<Label>,
}

impl Draw {
    pub fn new(pool: impl Into<String>, count: usize) -> Self {
        Self {
            pool: pool.into(),
            count,
            relabel: None,
        }
    }

    pub fn relabel(mut self, label: Label) -> Self {
        self.relabel = Some(label);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentPlan {
    pub draws: Vec<Draw>,
    #[serde(default)]
    pub shuffle: bool,
    /// Emit this many consecutive segments with the same plan.
    #[serde(default = "one")]
    pub repeat: usize,
}

fn one() -> usize {
    1
}

impl SegmentPlan {
    pub fn new(draws: Vec<Draw>, shuffle: bool) -> Self {
        Self {
            draws,
            shuffle,
            repeat: 1,
        }
    }

    fn len(&self) -> usize {
        self.draws.iter().map(|d| d.count).sum()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SegmentRecipe {
    pub pools: BTreeMap<String, Vec<LabeledPoint>>,
    /// Pools permuted once (seeded) before any draw, for random subsets.
    pub presampled: BTreeSet<String>,
    pub schedule: Vec<SegmentPlan>,
}

impl SegmentRecipe {
    pub fn validate(&self) -> Result<()> {
        let mut demand: BTreeMap<&str, usize> = BTreeMap::new();
        for plan in &self.schedule {
            if plan.len() == 0 || plan.repeat == 0 {
                return Err(Error::InvalidConfig(
                    "recipe segments must be non-empty".into(),
                ));
            }
            for d in &plan.draws {
                if !self.pools.contains_key(&d.pool) {
                    return Err(Error::UnknownPool(d.pool.clone()));
                }
                *demand.entry(&d.pool).or_default() += d.count * plan.repeat;
            }
        }
        for name in &self.presampled {
            if !self.pools.contains_key(name) {
                return Err(Error::UnknownPool(name.clone()));
            }
        }
        for (pool, requested) in demand {
            let available = self.pools[pool].len();
            if requested > available {
                return Err(Error::PoolExhausted {
                    pool: pool.to_string(),
                    requested,
                    available,
                });
            }
        }
        Ok(())
    }
}

/// Build the composed stream. Relabeling happens before shuffling.
pub fn compose_stream(recipe: &SegmentRecipe, seed: u64) -> Result<StreamSpec> {
    recipe.validate()?;
    let mut pools: BTreeMap<&str, &[LabeledPoint]> = BTreeMap::new();
    let mut permuted: BTreeMap<&str, Vec<LabeledPoint>> = BTreeMap::new();
    for (i, (name, pts)) in recipe.pools.iter().enumerate() {
        if recipe.presampled.contains(name) {
            let mut v = pts.clone();
            v.shuffle(&mut rng_from_seed(derive_seed(seed, &[0x900, i as u64])));
            permuted.insert(name, v);
        }
    }
    for (name, pts) in &recipe.pools {
        pools.insert(
            name,
            permuted
                .get(name.as_str())
                .map_or(pts.as_slice(), Vec::as_slice),
        );
    }

    let mut cursor: BTreeMap<&str, usize> = BTreeMap::new();
    let mut points = Vec::new();
    let mut changes = Vec::new();
    let mut segment_index = 0u64;
    for plan in &recipe.schedule {
        for _ in 0..plan.repeat {
            if segment_index > 0 {
                changes.push(points.len() as u64 + 1);
            }
            let mut segment = Vec::with_capacity(plan.len());
            for d in &plan.draws {
                let pool = pools[d.pool.as_str()];
                let at = cursor.entry(d.pool.as_str()).or_default();
                segment.extend(pool[*at..*at + d.count].iter().map(|p| match d.relabel {
                    Some(label) => LabeledPoint::new(p.features.clone(), label),
                    None => p.clone(),
                }));
                *at += d.count;
            }
            if plan.shuffle {
                segment.shuffle(&mut rng_from_seed(derive_seed(
                    seed,
                    &[0x5E9, segment_index],
                )));
            }
            points.extend(segment);
            segment_index += 1;
        }
    }
    StreamSpec::new(points, changes)
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct PoolEntry {
    path: PathBuf,
    #[serde(default = "default_label_col")]
    label_col: String,
    #[serde(default)]
    shuffle: bool,
}

fn default_label_col() -> String {
    "label".into()
}

/// On-disk recipe, TOML:
///
/// ```toml
/// seed = 7                      # optional
/// cycles = 4                    # optional, repeats the whole segment list
///
/// [pools.neg]
/// path = "neg.csv"              # relative to the recipe file
/// label_col = "label"           # optional
/// shuffle = true                # optional random subset order
///
/// [[segments]]
/// shuffle = true
/// draws = [{ pool = "neg", count = 500, relabel = -1 }]
/// ```
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecipeFile {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "one")]
    pub cycles: usize,
    pools: BTreeMap<String, PoolEntry>,
    segments: Vec<SegmentPlan>,
}

impl RecipeFile {
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let line = e.span().map_or(0, |s| {
                text[..s.start.min(text.len())].lines().count().max(1) as u64
            });
            Error::Parse {
                path: origin.to_path_buf(),
                line,
                message: e.message().to_string(),
            }
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path)
    }

    /// Load the referenced pools, resolving paths against `base_dir`.
    pub fn resolve(&self, base_dir: &Path) -> Result<SegmentRecipe> {
        let mut recipe = SegmentRecipe::default();
        for (name, entry) in &self.pools {
            let path = base_dir.join(&entry.path);
            recipe
                .pools
                .insert(name.clone(), load_labeled_csv(&path, &entry.label_col)?);
            if entry.shuffle {
                recipe.presampled.insert(name.clone());
            }
        }
        for _ in 0..self.cycles {
            recipe.schedule.extend(self.segments.iter().cloned());
        }
        Ok(recipe)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pool(label: Label, n: usize, tag: f64) -> Vec<LabeledPoint> {
        (0..n)
            .map(|i| LabeledPoint::new(vec![tag, i as f64], label))
            .collect()
    }

    #[test]
    fn single_segment_has_no_changes() {
        let mut r = SegmentRecipe::default();
        r.pools.insert("a".into(), pool(1, 10, 0.0));
        r.schedule
            .push(SegmentPlan::new(vec![Draw::new("a", 10)], true));
        let s = compose_stream(&r, 1).unwrap();
        assert_eq!(s.len(), 10);
        assert!(s.true_change_points.is_empty());
    }

    #[test]
    fn unshuffled_preserves_pool_order_and_relabels() {
        let mut r = SegmentRecipe::default();
        r.pools.insert("a".into(), pool(3, 6, 0.0));
        r.schedule
            .push(SegmentPlan::new(vec![Draw::new("a", 2).relabel(-1)], false));
        r.schedule
            .push(SegmentPlan::new(vec![Draw::new("a", 4)], false));
        let s = compose_stream(&r, 1).unwrap();
        let idx: Vec<f64> = s.points.iter().map(|p| p.features[1]).collect();
        assert_eq!(idx, vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(s.points[0].label, -1);
        assert_eq!(s.points[2].label, 3);
        assert_eq!(s.true_change_points, vec![3]);
    }

    #[test]
    fn exhaustion_names_pool_and_shortfall() {
        let mut r = SegmentRecipe::default();
        r.pools.insert("small".into(), pool(1, 5, 0.0));
        r.schedule
            .push(SegmentPlan::new(vec![Draw::new("small", 4)], false));
        r.schedule
            .push(SegmentPlan::new(vec![Draw::new("small", 3)], false));
        let err = compose_stream(&r, 0).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("small") && msg.contains("short by 2"), "{msg}");
    }

    #[test]
    fn unknown_pool_rejected() {
        let mut r = SegmentRecipe::default();
        r.schedule
            .push(SegmentPlan::new(vec![Draw::new("ghost", 1)], false));
        assert!(matches!(compose_stream(&r, 0), Err(Error::UnknownPool(_))));
    }

    #[test]
    fn shuffle_is_seeded_and_draws_are_unique() {
        let mut r = SegmentRecipe::default();
        r.pools.insert("a".into(), pool(1, 50, 0.0));
        r.pools.insert("b".into(), pool(-1, 50, 1.0));
        r.presampled.insert("a".into());
        r.schedule.push(SegmentPlan::new(
            vec![Draw::new("a", 25), Draw::new("b", 25)],
            true,
        ));
        r.schedule.push(SegmentPlan::new(
            vec![Draw::new("a", 25), Draw::new("b", 25)],
            true,
        ));
        let s1 = compose_stream(&r, 9).unwrap();
        assert_eq!(s1, compose_stream(&r, 9).unwrap());
        assert_ne!(s1, compose_stream(&r, 10).unwrap());
        let mut keys: Vec<(i64, i64)> = s1
            .points
            .iter()
            .map(|p| (p.features[0] as i64, p.features[1] as i64))
            .collect();
        keys.sort();
        keys.dedup();
        assert_eq!(keys.len(), 100);
    }

    #[test]
    fn recipe_file_parses_and_resolves() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("p.csv"), "x,label\n1,0\n2,0\n3,1\n4,1\n").unwrap();
        let text = r#"
            cycles = 2
            [pools.p]
            path = "p.csv"
            [[segments]]
            draws = [{ pool = "p", count = 1, relabel = 5 }]
        "#;
        let file = RecipeFile::parse(text, Path::new("r.toml")).unwrap();
        let recipe = file.resolve(dir.path()).unwrap();
        let s = compose_stream(&recipe, 0).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.true_change_points, vec![2]);
        assert!(s.points.iter().all(|p| p.label == 5));
    }

    #[test]
    fn recipe_parse_error_reports_line() {
        let text = "cycles = 1\n[pools.p]\npath = 3\n";
        match RecipeFile::parse(text, Path::new("r.toml")) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }
}
