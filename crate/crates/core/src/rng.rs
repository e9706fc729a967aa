//! Seeded randomness.
//!
//! All randomness comes from ChaCha8 keyed by a 64-bit seed. Independent
//! consumers of one seed use distinct ChaCha stream ids so that their draws
//! never overlap and do not depend on each other's consumption.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream ids used inside the library. The CLI derives per-trial streams
/// above `TRIAL_BASE`.
pub mod streams {
    pub const GRAPH: u64 = 0;
    pub const EXAMPLE_BIPARTITE: u64 = 1;
    pub const EXAMPLE_EULERIAN: u64 = 2;
    pub const CLASS_SAMPLING: u64 = 3;
    pub const DOT_STRUCTURE: u64 = 16;
    pub const ZERO_STRUCTURE: u64 = 17;
    pub const TRIAL_BASE: u64 = 1 << 32;
}

/// Generator for `(seed, stream)`. Seed 0 is valid.
pub fn rng_for(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Mixes an attempt counter into a seed for retry loops.
pub fn derive_seed(seed: u64, salt: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
