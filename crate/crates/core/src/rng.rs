//! Seeded random streams.
//!
//! Every random draw in the crate goes through an explicitly passed
//! [`Stream`]. Substreams are keyed by `(seed, index)` using ChaCha's 64-bit
//! stream selector, so scenario `i` sees the same numbers no matter which
//! thread evaluates it or in which order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The random stream type used throughout the crate.
pub type Stream = ChaCha8Rng;

/// Root stream for a seed (substream 0).
pub fn stream(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent substream `index` of `seed`.
pub fn substream(seed: u64, index: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
