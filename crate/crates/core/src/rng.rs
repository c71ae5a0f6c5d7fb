//! Seed derivation.
//!
//! Every random consumer in the crate gets its own ChaCha stream keyed by a
//! `(seed, stream)` pair, so results never depend on evaluation order or on
//! how many worker threads are running.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// An RNG for substream `stream` of `seed`.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derives a child seed from a parent seed and a tag (splitmix64 finalizer).
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a bit string into a seed. Equal bit strings give equal seeds.
pub fn hash_bits(seed: u64, bits: &[bool]) -> u64 {
    let mut h = derive_seed(seed, bits.len() as u64);
    for chunk in bits.chunks(64) {
        let word = chunk
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &b)| acc | ((b as u64) << i));
        h = derive_seed(h, word);
    }
    h
}
