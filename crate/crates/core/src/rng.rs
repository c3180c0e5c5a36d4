//! Seeded random streams.
//!
//! A run has one 64-bit seed. Every consumer (a column of the generator, a
//! tree of a forest, a fold of a cross-validation) asks for a substream by a
//! label and an index, which hashes into an independent ChaCha8 generator.
//! Because streams are addressed rather than shared, the order in which
//! parallel workers run cannot change what they draw.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a parent seed with a label and an index into a child seed.
pub fn derive_seed(seed: u64, label: &str, index: u64) -> u64 {
    let mut h = FNV_OFFSET;
    for b in label.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    splitmix64(splitmix64(seed ^ h).wrapping_add(splitmix64(index)))
}

pub fn substream(seed: u64, label: &str, index: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, label, index))
}
