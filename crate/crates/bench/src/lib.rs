//! Fixtures shared by the benchmarks.

use exmart_core::{Scenario, StreamSpec};

/// A synthetic stream with `segments` segments of `segment_len` points.
pub fn scenario_stream(
    scenario: Scenario,
    segments: usize,
    segment_len: usize,
    seed: u64,
) -> StreamSpec {
    scenario
        .generate(segments, segment_len, None, None, seed)
        .expect("benchmark stream parameters are valid")
}
