//! Seed derivation. Every random stream is keyed by a base seed and a
//! purpose label so that shuffling, dropout and initialization stay
//! independently reproducible.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TagRng = ChaCha8Rng;

/// Mixes a purpose label and a base seed into a new 64-bit seed.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    // FNV-1a over the label, then a splitmix64 finalizer.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix(seed ^ splitmix(h))
}

pub fn derive_indexed(seed: u64, label: &str, index: u64) -> u64 {
    splitmix(derive_seed(seed, label) ^ splitmix(index.wrapping_add(0x9e37_79b9_7f4a_7c15)))
}

pub fn rng_for(seed: u64, label: &str) -> TagRng {
    TagRng::seed_from_u64(derive_seed(seed, label))
}

pub fn rng_indexed(seed: u64, label: &str, index: u64) -> TagRng {
    TagRng::seed_from_u64(derive_indexed(seed, label, index))
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
