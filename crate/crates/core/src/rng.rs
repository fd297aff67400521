//! Deterministic RNG streams keyed by (seed, purpose, epoch, ...).
//!
//! Every random draw in training comes from a stream derived from its
//! coordinates rather than from one shared generator, so results do not
//! depend on evaluation order and a run can resume mid-way.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Init = 1,
    ShuffleLabeled = 2,
    ShuffleUnlabeled = 3,
    PartnerLabeled = 4,
    PartnerUnlabeled = 5,
    AugmentWeak = 6,
    AugmentStrong = 7,
    Synthetic = 8,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// FNV-1a, used to fold sample ids into stream keys.
pub fn hash_id(id: &str) -> u64 {
    id.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}

pub fn stream(seed: u64, purpose: Purpose, keys: &[u64]) -> StreamRng {
    let mut h = splitmix64(seed ^ splitmix64(purpose as u64));
    for &k in keys {
        h = splitmix64(h ^ k);
    }
    StreamRng::seed_from_u64(h)
}
