//! Seeded random streams. Every consumer draws from its own ChaCha stream of
//! the run seed, so adding draws in one place never shifts another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub const MEMPOOL: u64 = 1;
pub const AGENTS: u64 = 2;
pub const DEMAND: u64 = 3;
pub const SUITE: u64 = 4;
pub const BUILDERS: u64 = 5;
pub const EVALUATION: u64 = 6;

/// Stream `stream` of `seed`.
pub fn stream(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Sub-stream for item `index` (slot, episode, instance) of a stream.
pub fn substream(seed: u64, stream: u64, index: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(derive(seed, index));
    rng.set_stream(stream);
    rng
}

/// Seed for item `index` of a run (one splitmix64 step).
pub fn derive(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
