//! Online concept-change detection by testing exchangeability.
//!
//! Points of a labeled stream are scored by a strangeness provider, turned
//! into randomized conformal p-values, and folded into a randomized power
//! martingale. A change is flagged when the martingale reaches `lambda`;
//! by Doob's maximal inequality this happens on an exchangeable stream with
//! probability at most `1 / lambda`.
//!
//! ```
//! use exmart_core::{Detector, DetectorConfig, IncrementalKnn, KnnProviderConfig, LabeledPoint};
//!
//! let mut det = Detector::new(
//!     DetectorConfig::new(20.0).with_seed(7),
//!     IncrementalKnn::new(KnnProviderConfig::default()),
//! )
//! .unwrap();
//! let out = det.step(LabeledPoint::new(vec![0.3, -0.2], 1)).unwrap();
//! assert!(out.event.is_none());
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod design;
pub mod detector;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod ingest;
pub mod martingale;
pub mod rng;
pub mod simulate;
pub mod strangeness;
pub mod types;

pub use design::{doob_false_alarm_bound, estimate_mean_delay, threshold_from_design, TestDesign};
pub use detector::{
    DetectionEvent, Detector, DetectorConfig, MultiChannelDetector, MultiStep, StepOutcome,
};
pub use error::{Error, Result};
pub use martingale::{compute_p_value, martingale_update_factor, DEFAULT_EPSILON};
pub use simulate::{Scenario, StreamSpec};
pub use strangeness::{
    IncrementalKnn, KnnProviderConfig, ProviderConfig, StrangenessProvider, SvmProvider,
    SvmProviderConfig,
};
pub use types::{Label, LabeledPoint, PValue};
