//! Seed-stream derivation. Every random component gets its own ChaCha stream
//! keyed by a master seed and a small tuple of labels, so results do not depend
//! on thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

#[inline]
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Mixes a label into a seed.
#[inline]
pub fn derive(seed: u64, label: u64) -> u64 {
    splitmix64(seed ^ splitmix64(label.wrapping_add(0x632B_E59B_D9B4_E019)))
}

pub fn derive2(seed: u64, a: u64, b: u64) -> u64 {
    derive(derive(seed, a), b)
}

pub fn stream(seed: u64, label: u64) -> Rng {
    Rng::seed_from_u64(derive(seed, label))
}

/// Uniform value in [0, 1) from a hash, 53 bits of precision.
#[inline]
pub fn unit_from_hash(h: u64) -> f64 {
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Well-known labels for independent streams of one master seed.
pub mod label {
    pub const ALGORITHM: u64 = 1;
    pub const EVALUATION: u64 = 2;
    pub const GENERATOR: u64 = 3;
    pub const WEIGHTS: u64 = 4;
    pub const COMMUNITIES: u64 = 5;
    pub const NONEDGE_WEIGHTS: u64 = 6;
}
