//! Synthetic time-varying streams with known change points.

mod hyperplane;
mod ndc;
mod noise;

pub use hyperplane::{
    generate_hyperplane_stream, hyperplane_label, segment_weights, HyperplaneConfig, RotationMode,
};
pub use ndc::{generate_ndc_stream, NdcConfig};
pub use noise::apply_label_noise;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::types::{label_set, Label, LabeledPoint};

/// A stream together with its ground-truth change points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamSpec {
    pub points: Vec<LabeledPoint>,
    /// 1-based index of the first point of each new concept, ascending.
    pub true_change_points: Vec<u64>,
}

impl StreamSpec {
    pub fn new(points: Vec<LabeledPoint>, true_change_points: Vec<u64>) -> Result<Self> {
        let spec = Self {
            points,
            true_change_points,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> Option<usize> {
        self.points.first().map(LabeledPoint::dim)
    }

    pub fn labels(&self) -> Vec<Label> {
        label_set(&self.points)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.points.len() as u64;
        let mut prev = 1;
        for &c in &self.true_change_points {
            if c <= prev || c > n {
                return Err(Error::InvalidConfig(format!(
                    "change point {c} must be increasing, > 1 and <= stream length {n}"
                )));
            }
            prev = c;
        }
        if let Some(d) = self.dim() {
            if let Some(bad) = self.points.iter().find(|p| p.dim() != d) {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: bad.dim(),
                });
            }
        }
        Ok(())
    }
}

/// Change points for `num_segments` equal segments: `segment_len * i + 1`.
pub fn segment_change_points(segment_len: usize, num_segments: usize) -> Vec<u64> {
    (1..num_segments)
        .map(|i| (segment_len * i) as u64 + 1)
        .collect()
}

pub(crate) fn segment_seed(seed: u64, segment: usize) -> u64 {
    derive_seed(seed, &[0x5E6, segment as u64])
}

pub(crate) fn noise_seed(seed: u64) -> u64 {
    derive_seed(seed, &[0x4015E])
}

/// The five synthetic scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scenario {
    /// Gradual rotations of a 2-D hyperplane.
    A,
    /// Arbitrary rotations of a 2-D hyperplane.
    B,
    /// Scenario B with 5% label noise.
    C,
    /// Arbitrary 10-D hyperplanes with 5% label noise.
    D,
    /// 10-D normally distributed clusters with 5% label noise.
    E,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [
        Scenario::A,
        Scenario::B,
        Scenario::C,
        Scenario::D,
        Scenario::E,
    ];

    pub fn default_dim(self) -> usize {
        match self {
            Scenario::A | Scenario::B | Scenario::C => 2,
            Scenario::D | Scenario::E => 10,
        }
    }

    pub fn default_noise_pct(self) -> f64 {
        match self {
            Scenario::A | Scenario::B => 0.0,
            Scenario::C | Scenario::D | Scenario::E => 5.0,
        }
    }

    /// Generate the scenario's stream. `dim` and `noise_pct` override the
    /// defaults; the rotating scenarios A–C only exist in two dimensions.
    pub fn generate(
        self,
        num_segments: usize,
        segment_len: usize,
        dim: Option<usize>,
        noise_pct: Option<f64>,
        seed: u64,
    ) -> Result<StreamSpec> {
        let dim = dim.unwrap_or(self.default_dim());
        let noise_pct = noise_pct.unwrap_or(self.default_noise_pct());
        let rotation = match self {
            Scenario::A => RotationMode::Restricted,
            Scenario::B | Scenario::C => RotationMode::Arbitrary,
            Scenario::D => RotationMode::RandomWeights,
            Scenario::E => {
                let cfg = NdcConfig {
                    dim,
                    segment_len,
                    num_segments,
                    noise_pct,
                    ..NdcConfig::default()
                };
                return generate_ndc_stream(&cfg, seed);
            }
        };
        let cfg = HyperplaneConfig {
            dim,
            offset: 0.0,
            segment_len,
            num_segments,
            rotation,
            noise_pct,
        };
        generate_hyperplane_stream(&cfg, seed)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Scenario::A => "A",
            Scenario::B => "B",
            Scenario::C => "C",
            Scenario::D => "D",
            Scenario::E => "E",
        };
        f.write_str(s)
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "A" => Ok(Scenario::A),
            "B" => Ok(Scenario::B),
            "C" => Ok(Scenario::C),
            "D" => Ok(Scenario::D),
            "E" => Ok(Scenario::E),
            other => Err(Error::InvalidConfig(format!("unknown scenario `{other}`"))),
        }
    }
}

fn check_noise(pct: f64) -> Result<()> {
    if (0.0..50.0).contains(&pct) {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!(
            "noise percentage must lie in [0, 50), got {pct}"
        )))
    }
}
