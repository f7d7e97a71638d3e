//! Shared fixtures for the criterion benches.

use vqcsvm_core::data::{self, Dataset};
use vqcsvm_core::preprocess::{self, DEFAULT_RANGE};

/// Seeded synthetic cohort reduced to its first `k` columns and scaled to
/// the default range, the shape both classifiers consume in the sweep.
pub fn scaled_cohort(k: usize, seed: u64) -> Dataset {
    let spec = data::SynthSpec { seed, ..Default::default() };
    let full = data::generate_synthetic(&spec).expect("default spec is valid");
    let cols: Vec<usize> = (0..k).collect();
    let subset = full.select_columns(&cols).expect("k within range");
    let params = preprocess::fit_scaler(subset.features(), DEFAULT_RANGE).expect("non-empty matrix");
    let scaled = params.transform(subset.features()).expect("same width");
    subset.with_features(scaled).expect("same shape")
}
