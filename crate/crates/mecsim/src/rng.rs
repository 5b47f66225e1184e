//! Deterministic stream derivation.
//!
//! Every random draw in the simulator comes from a `ChaCha8Rng` seeded by
//! mixing the run seed with a purpose tag and the coordinates of the draw
//! (period, client, resource block, ...), so any quantity is reproducible
//! in isolation without replaying the run.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// splitmix64 finalizer; the standard 64-bit avalanche mix.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Combine a seed with draw coordinates into a single stream seed.
pub fn mix(seed: u64, parts: &[u64]) -> u64 {
    let mut acc = splitmix64(seed);
    for &p in parts {
        acc = splitmix64(acc ^ p.wrapping_mul(0x9e3779b97f4a7c15));
    }
    acc
}

/// A seeded generator for one derived stream.
pub fn stream(seed: u64, parts: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(seed, parts))
}
