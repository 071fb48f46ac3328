//! Deterministic derivation of child seeds from a master seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used for every seeded stream in the crate.
pub type StreamRng = ChaCha8Rng;

/// Mixes `master` and `index` into a new 64-bit seed (splitmix64 finalizer).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn stream(master: u64, index: u64) -> StreamRng {
    StreamRng::seed_from_u64(derive_seed(master, index))
}
