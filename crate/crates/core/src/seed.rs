//! Seed derivation.
//!
//! Every stochastic step draws from a ChaCha8 stream seeded with a child seed
//! derived from the user seed and a label (a bucket label, a replicate index,
//! a pool name). Child seeds depend only on their inputs, so independent jobs
//! produce the same draws regardless of scheduling or thread count.
//!
//! Derivation: `child = splitmix64(seed ^ splitmix64(fnv1a64(label)))`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(FNV_PRIME)
    })
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Child seed for a string label.
pub fn child(seed: u64, label: &str) -> u64 {
    splitmix64(seed ^ splitmix64(fnv1a64(label.as_bytes())))
}

/// Child seed for a numeric index (bootstrap replicate, job number).
pub fn child_index(seed: u64, index: u64) -> u64 {
    child(seed, &format!("#{index}"))
}

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
