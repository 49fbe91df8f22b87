//! Seed derivation and the portable generator used everywhere randomness
//! is needed.
//!
//! All streams are ChaCha8 ([`rand_chacha::ChaCha8Rng`]) seeded through
//! `seed_from_u64`; Gaussian variates come from `rand_distr::StandardNormal`
//! (ziggurat). Both are specified bit-for-bit by their crates, so outputs are
//! stable across platforms. Child seeds are derived with a SplitMix64
//! finalizer folded over a path of integers, which makes every per-example
//! or per-trial stream a pure function of the master seed and its position.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed from `master` and a path of stream coordinates.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(master), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// Generator for the stream at `path` below `master`.
pub fn stream(master: u64, path: &[u64]) -> Rng {
    Rng::seed_from_u64(derive_seed(master, path))
}

/// Stable 64-bit tag for a string label, for use in seed paths.
pub fn tag(label: &str) -> u64 {
    // FNV-1a
    label.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01B3)
    })
}
