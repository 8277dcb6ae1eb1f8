//! Counter-based seeding.
//!
//! Every random draw in the crate comes from a ChaCha8 stream selected by a
//! `(seed, key)` pair, so results depend only on the seed and on *which* quantity
//! is being drawn, never on evaluation order or thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose tags mixed into stream keys so unrelated draws never share a stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Purpose {
    Gains = 1,
    Demand = 2,
    ChannelState = 3,
    Sensing = 4,
    Access = 5,
    Loss = 6,
    LinkQuality = 7,
    Instance = 8,
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a list of indices into one 64-bit stream key.
pub fn stream_key(purpose: Purpose, indices: &[u64]) -> u64 {
    indices.iter().fold(mix64(purpose as u64), |acc, &i| mix64(acc ^ mix64(i)))
}

/// A generator for the stream `(seed, purpose, indices...)`.
pub fn stream(seed: u64, purpose: Purpose, indices: &[u64]) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_key(purpose, indices));
    rng
}
