//! Seeded random streams.
//!
//! Each run owns one seed. Independent parts of a run (placement, failure
//! planning) draw from separate ChaCha streams of that seed, so changing how
//! many numbers one part consumes never shifts another part's draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Placement = 0,
    Failure = 1,
}

pub fn stream(seed: u64, which: Stream) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(which as u64);
    rng
}
