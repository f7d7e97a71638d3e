//! Seed derivation helpers.
//!
//! Every stochastic step takes an explicit seed; nested seeds are derived by
//! mixing with SplitMix64 so that (master, a, b) tuples map to well-spread
//! 64-bit values.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed from a parent seed and a sequence of integer tags.
pub fn derive_seed(parent: u64, tags: &[u64]) -> u64 {
    tags.iter()
        .fold(splitmix64(parent), |acc, &t| splitmix64(acc ^ splitmix64(t)))
}
