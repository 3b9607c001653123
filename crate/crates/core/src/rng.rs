//! Deterministic seed derivation.
//!
//! Every randomized component draws from its own substream derived from the
//! user-facing seed with a splitmix-style 64-bit mixer. Substreams keyed on a
//! stable identity (a row id, a cluster index) make results independent of
//! evaluation order and of the number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags keeping independent consumers of one user seed decorrelated.
pub(crate) const STREAM_DIRECTIONS: u64 = 0x5157_4144_0001;
pub(crate) const STREAM_VOTES: u64 = 0x5157_4144_0002;
pub(crate) const STREAM_KMEANS: u64 = 0x5157_4144_0003;
pub(crate) const STREAM_SPLIT: u64 = 0x5157_4144_0004;
pub(crate) const STREAM_MIXTURE: u64 = 0x5157_4144_0005;
pub(crate) const STREAM_VERIFY: u64 = 0x5157_4144_0006;

/// Mixes a seed with a stream key into a new 64-bit seed.
///
/// Uses the splitmix64 finalizer, so for a fixed `seed` the map
/// `stream -> mix(seed, stream)` is injective.
pub fn mix(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A generator for the substream `(seed, stream)`.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(seed, stream))
}
