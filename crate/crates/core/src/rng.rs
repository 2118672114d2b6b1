//! Deterministic random streams.
//!
//! Every run derives independent ChaCha streams from `(seed, stream, index)`
//! so that goal sampling, user behaviour and policy exploration never share
//! state. Paired comparisons rely on this: two variants trained with the same
//! seed see the same goal sequence.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type DialogueRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Goals = 1,
    User = 2,
    Policy = 3,
    EvalGoals = 4,
    EvalUser = 5,
    EvalPolicy = 6,
    Init = 7,
    Learn = 8,
}

/// SplitMix64 finaliser, used to spread `(seed, stream, index)` over the
/// 64-bit ChaCha seed space.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn stream(seed: u64, which: Stream, index: u64) -> DialogueRng {
    let key = mix(mix(mix(seed) ^ which as u64) ^ index);
    ChaCha8Rng::seed_from_u64(key)
}

pub fn from_seed(seed: u64) -> DialogueRng {
    ChaCha8Rng::seed_from_u64(seed)
}
