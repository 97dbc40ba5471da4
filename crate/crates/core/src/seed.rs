//! Seed derivation and the seeded generator used everywhere randomness is
//! needed.
//!
//! Every random stream in the crate is a ChaCha20 generator seeded from a
//! 64-bit value. Independent streams (replicates, repeats, matrix rows) get
//! their seed from [`mix_seed`], so the whole output of a study is a pure
//! function of the user's seed no matter how work is scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type SeededRng = ChaCha20Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of sub-stream `stream` of `seed`:
/// `splitmix64(seed ^ splitmix64(stream + 1))`.
pub fn mix_seed(seed: u64, stream: u64) -> u64 {
    splitmix64(seed ^ splitmix64(stream.wrapping_add(1)))
}

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Named sub-streams, so unrelated consumers of one seed never overlap.
pub mod streams {
    pub const SIMULATE: u64 = 0x5349_4d55;
    pub const BINARIZE: u64 = 0x4249_4e41;
    pub const SPLIT: u64 = 0x5350_4c54;
}
