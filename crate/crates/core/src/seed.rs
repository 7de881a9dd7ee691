//! Deterministic seed fan-out.
//!
//! A master seed is expanded into independent per-task seeds by hashing the
//! triple `(master, stream, index)` with the SplitMix64 finalizer. Tasks can
//! then run in any order (or in parallel) and still see identical streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for item `index` of stream `stream` under `master`.
pub fn derive_seed(master: u64, stream: u64, index: u64) -> u64 {
    let a = mix(master.wrapping_add(GOLDEN));
    let b = mix(a ^ stream.wrapping_mul(GOLDEN).wrapping_add(1));
    mix(b ^ index.wrapping_mul(GOLDEN).wrapping_add(2))
}

/// The generator used everywhere a seed is consumed.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
