//! Seeded, counter-based random streams.
//!
//! A scenario owns one 64-bit seed; each component draws from its own ChaCha
//! stream selected by a fixed stream id, so adding draws in one component
//! never shifts the numbers seen by another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Fixed stream ids per component.
pub mod stream {
    pub const WORLD: u64 = 1;
    pub const MACHINE: u64 = 2;
    pub const SEARCH: u64 = 3;
    pub const LEARNER: u64 = 4;
    pub const TERRAIN: u64 = 5;
    pub const REFINER: u64 = 6;
    pub const BANDS: u64 = 7;
}

/// Generator for `stream` under `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Generator for replicate `index` of `stream`; replicates never collide
/// with the base streams above.
pub fn replicate_rng(seed: u64, stream: u64, index: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((stream << 32) | (index + 1));
    rng
}
