//! Deterministic sub-seed derivation.
//!
//! Every stochastic component takes a `u64` seed and derives independent
//! sub-streams with [`derive`] / [`derive_str`], so results never depend on
//! evaluation order or thread scheduling: a loan's path, a bootstrap
//! replicate or a stratum shuffle is a pure function of the root seed and its
//! own identity.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finaliser; a strong 64-bit mixer.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// FNV-1a over arbitrary bytes; stable across platforms and runs.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Derive a sub-seed from a root seed and a numeric stream id.
pub fn derive(root: u64, stream: u64) -> u64 {
    splitmix64(root ^ splitmix64(stream))
}

/// Derive a sub-seed from a root seed and a textual stream tag.
pub fn derive_str(root: u64, tag: &str) -> u64 {
    derive(root, fnv1a64(tag.as_bytes()))
}

/// Seeded RNG for one sub-stream. ChaCha8 is deterministic and portable.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
