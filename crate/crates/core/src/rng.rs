//! Seeded random streams.
//!
//! Every stochastic task draws from a ChaCha stream addressed by
//! `(seed, index)`, so results do not depend on how tasks are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// Stream number `index` of the master `seed`.
pub fn stream(seed: u64, index: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
