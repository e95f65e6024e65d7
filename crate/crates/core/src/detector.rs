//! The online exchangeability tester.
//!
//! Each arriving point is scored against the retained bag, converted to a
//! randomized p-value and folded into the log power martingale. Crossing
//! `ln(lambda)` emits a [`DetectionEvent`] and restarts the test from an
//! empty bag.

use log::debug;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::martingale::{compute_p_value, draw_theta, log_update_factor, DEFAULT_EPSILON};
use crate::rng::{derive_seed, rng_from_seed, StreamRng};
use crate::strangeness::{knn_strangeness, KnnProviderConfig, StrangenessProvider};
use crate::types::{Label, LabeledPoint, PValue};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    /// Power-martingale exponent in `(0, 1)`.
    pub epsilon: f64,
    /// Detection threshold, `> 1`.
    pub lambda: f64,
    /// Maximum bag size; oldest points are evicted beyond it.
    pub window_cap: Option<usize>,
    pub seed: u64,
}

impl DetectorConfig {
    pub fn new(lambda: f64) -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
            lambda,
            window_cap: None,
            seed: 0,
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_window_cap(mut self, cap: Option<usize>) -> Self {
        self.window_cap = cap;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        if !(self.lambda > 1.0) {
            return Err(Error::InvalidConfig(format!(
                "lambda must exceed 1, got {}",
                self.lambda
            )));
        }
        if self.window_cap == Some(0) {
            return Err(Error::InvalidConfig("window cap must be positive".into()));
        }
        Ok(())
    }
}

/// A threshold crossing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionEvent {
    /// 1-based global index of the point that crossed the threshold.
    pub index: u64,
    /// Natural log of the martingale at the crossing.
    pub log_martingale: f64,
    pub channel: Label,
}

impl DetectionEvent {
    pub fn martingale(&self) -> f64 {
        self.log_martingale.exp()
    }
}

/// Everything observable about one detector step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub index: u64,
    pub p_value: PValue,
    /// Log martingale after this point's update, before any reset.
    pub log_martingale: f64,
    /// The provider failed and nearest-neighbor strangeness was used instead.
    pub fell_back: bool,
    pub event: Option<DetectionEvent>,
}

/// Sequential martingale tester over a single label channel.
#[derive(Debug, Clone)]
pub struct Detector<P> {
    config: DetectorConfig,
    provider: P,
    fallback: KnnProviderConfig,
    channel: Label,
    bag: Vec<LabeledPoint>,
    dim: Option<usize>,
    log_martingale: f64,
    log_lambda: f64,
    points_seen: u64,
    rng: StreamRng,
}

impl<P: StrangenessProvider> Detector<P> {
    pub fn new(config: DetectorConfig, provider: P) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            provider,
            fallback: KnnProviderConfig::default(),
            channel: 0,
            bag: Vec::new(),
            dim: None,
            log_martingale: 0.0,
            log_lambda: config.lambda.ln(),
            points_seen: 0,
            rng: rng_from_seed(config.seed),
        })
    }

    pub fn with_channel(mut self, channel: Label) -> Self {
        self.channel = channel;
        self
    }

    pub fn config(&self) -> &DetectorConfig {
        &self.config
    }

    pub fn bag(&self) -> &[LabeledPoint] {
        &self.bag
    }

    pub fn log_martingale(&self) -> f64 {
        self.log_martingale
    }

    pub fn points_seen(&self) -> u64 {
        self.points_seen
    }

    pub fn channel(&self) -> Label {
        self.channel
    }

    /// Clear the bag and restart the martingale at one.
    pub fn reset(&mut self) {
        self.bag.clear();
        self.log_martingale = 0.0;
        self.provider.reset();
    }

    pub fn step(&mut self, point: LabeledPoint) -> Result<StepOutcome> {
        match self.dim {
            Some(d) if d != point.dim() => {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: point.dim(),
                })
            }
            None => self.dim = Some(point.dim()),
            _ => {}
        }

        self.bag.push(point);
        let (scores, fell_back) = match self.provider.scores(&self.bag) {
            Ok(scores) => (scores, false),
            Err(err) => {
                debug!(
                    "channel {} step {}: {err}; using nearest-neighbor strangeness",
                    self.channel,
                    self.points_seen + 1
                );
                (knn_strangeness(&self.bag, &self.fallback), true)
            }
        };
        let theta = draw_theta(&mut self.rng);
        let p_value = compute_p_value(&scores, theta)?;
        self.log_martingale += log_update_factor(p_value, self.config.epsilon)?;
        self.points_seen += 1;

        let log_martingale = self.log_martingale;
        let event = if log_martingale >= self.log_lambda {
            self.reset();
            Some(DetectionEvent {
                index: self.points_seen,
                log_martingale,
                channel: self.channel,
            })
        } else {
            if !fell_back {
                self.provider.commit();
            }
            if let Some(cap) = self.config.window_cap {
                if self.bag.len() > cap {
                    self.bag.remove(0);
                    self.provider.evict_front();
                }
            }
            None
        };
        Ok(StepOutcome {
            index: self.points_seen,
            p_value,
            log_martingale,
            fell_back,
            event,
        })
    }

    /// Run over a whole stream, returning every step.
    pub fn run<'a, I>(&mut self, points: I) -> Result<Vec<StepOutcome>>
    where
        I: IntoIterator<Item = &'a LabeledPoint>,
    {
        points.into_iter().map(|p| self.step(p.clone())).collect()
    }
}

/// One step of every one-vs-rest channel.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiStep {
    /// Outcomes in ascending class order.
    pub channels: Vec<StepOutcome>,
    pub event: Option<DetectionEvent>,
}

/// One detector per class, each testing its class against the rest.
///
/// A crossing on any channel resets every channel. When several channels
/// cross on the same point the lowest class id is reported.
#[derive(Debug, Clone)]
pub struct MultiChannelDetector<P> {
    labels: Vec<Label>,
    channels: Vec<Detector<P>>,
}

impl<P: StrangenessProvider> MultiChannelDetector<P> {
    pub fn new<F>(config: DetectorConfig, labels: &[Label], mut factory: F) -> Result<Self>
    where
        F: FnMut(Label) -> P,
    {
        let mut labels = labels.to_vec();
        labels.sort_unstable();
        labels.dedup();
        if labels.is_empty() {
            return Err(Error::InvalidConfig("label set is empty".into()));
        }
        let channels = labels
            .iter()
            .map(|&class| {
                let cfg = config.with_seed(channel_seed(config.seed, class));
                Detector::new(cfg, factory(class)).map(|d| d.with_channel(class))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { labels, channels })
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn channels(&self) -> &[Detector<P>] {
        &self.channels
    }

    pub fn reset(&mut self) {
        self.channels.iter_mut().for_each(Detector::reset);
    }

    pub fn step(&mut self, point: &LabeledPoint) -> Result<MultiStep> {
        if self.labels.binary_search(&point.label).is_err() {
            return Err(Error::UnknownLabel(point.label));
        }
        let mut outcomes = Vec::with_capacity(self.channels.len());
        for (det, &class) in self.channels.iter_mut().zip(&self.labels) {
            outcomes.push(det.step(point.one_vs_rest(class))?);
        }
        let event = outcomes.iter().find_map(|o| o.event);
        if event.is_some() {
            self.reset();
        }
        Ok(MultiStep {
            channels: outcomes,
            event,
        })
    }
}

/// Seed of the RNG stream owned by the channel for `class`.
pub fn channel_seed(seed: u64, class: Label) -> u64 {
    derive_seed(seed, &[0x0C4A_77E1, class as i64 as u64])
}
