//! Deterministic seed derivation.
//!
//! Every random stream in the crate is a ChaCha8 generator whose key comes
//! from mixing a user seed with a tuple of integer labels, and whose stream
//! id is a purpose tag. Replicate `i` of cell `c` therefore draws the same
//! numbers no matter which worker runs it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags, one per consumer of randomness.
pub mod purpose {
    pub const SAMPLE: u64 = 1;
    pub const TRUNCATED_PAIRS: u64 = 2;
    pub const WIENER: u64 = 3;
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes `seed` with an ordered list of labels into a new 64-bit seed.
pub fn derive_seed(seed: u64, labels: &[u64]) -> u64 {
    labels
        .iter()
        .fold(splitmix64(seed), |acc, &l| splitmix64(acc ^ splitmix64(l)))
}

pub fn stream(seed: u64, purpose: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(purpose);
    rng
}
