//! Deterministic seed derivation.
//!
//! One master seed fans out into independent child streams keyed by integer
//! tags (class index, batch index, image index, ...). Children are ChaCha8
//! generators: fast, portable, and identical on every platform, so a
//! synthesis run reproduces byte-for-byte no matter how work is scheduled
//! across threads.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 output function; decorrelates consecutive or related inputs.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds `tags` into `master`, producing a child seed that differs for any
/// change of tag values, tag order, or tag count.
pub fn derive(master: u64, tags: &[u64]) -> u64 {
    let mut state = mix(master);
    for &t in tags {
        state = mix(state ^ mix(t));
    }
    // Tag count folds in so (a) and (a, 0) do not collide.
    mix(state ^ mix(tags.len() as u64))
}

/// Child generator for the stream identified by `tags`.
pub fn rng(master: u64, tags: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(master, tags))
}

/// Generator seeded directly with a previously derived value.
pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
