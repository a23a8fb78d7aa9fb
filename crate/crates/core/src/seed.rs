//! Labeled sub-streams derived from a single 64-bit master seed.
//!
//! Every random decision in the crate draws from a stream named by the
//! component that consumes it plus a few integer indices, so parallel jobs
//! never share state and results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed from `master`, a component label and indices.
pub fn sub_seed(master: u64, label: &str, indices: &[u64]) -> u64 {
    // FNV-1a over the label keeps derivation stable across platforms.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    let mut s = splitmix64(master ^ splitmix64(h));
    for &i in indices {
        s = splitmix64(s ^ splitmix64(i.wrapping_add(0x632B_E59B_D9B4_E019)));
    }
    s
}

/// Seeded generator for a labeled sub-stream.
pub fn rng_for(master: u64, label: &str, indices: &[u64]) -> Rng {
    Rng::seed_from_u64(sub_seed(master, label, indices))
}
