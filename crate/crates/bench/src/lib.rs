//! Shared fixtures for the benchmarks.

use hdbp_core::montecarlo::{sample_configuration, sample_stream};
use hdbp_core::{Configuration, GridShape};

pub const SEED: u64 = 0xb007;

/// `count` independent p-random configurations on `shape`, fixed by `SEED`.
pub fn random_configurations(shape: &GridShape, p: f64, count: u64) -> Vec<Configuration> {
    (0..count)
        .map(|i| sample_configuration(shape, p, &mut sample_stream(SEED, 0, i)).expect("p in [0, 1]"))
        .collect()
}
