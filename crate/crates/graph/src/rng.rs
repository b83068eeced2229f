//! Seed plumbing. Every random choice in the workspace flows from a
//! 64-bit seed through these helpers, so runs replay exactly.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type DfRng = ChaCha8Rng;

#[inline]
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of child stream `index` of `seed`.
#[inline]
pub fn substream(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index.wrapping_add(0xD1B5_4A32_D192_ED03)))
}

/// Seed of a named child stream.
pub fn named_stream(seed: u64, name: &str) -> u64 {
    name.bytes()
        .fold(seed, |acc, b| substream(acc, u64::from(b)))
}

pub fn rng_from_seed(seed: u64) -> DfRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform in `[0, 1)` from a hash value.
#[inline]
pub fn unit_from_hash(h: u64) -> f64 {
    (h >> 11) as f64 / (1u64 << 53) as f64
}
