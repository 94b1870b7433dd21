//! Keyed random streams.
//!
//! Every random decision in an experiment draws from a ChaCha8 stream whose
//! key is derived from `(master seed, horizon, seed index)` and whose stream
//! id is the [`Purpose`]. ChaCha is counter based, so a cell's output depends
//! only on its coordinates and never on the order cells are evaluated in.
//! Adversary, environment and player randomness never share a stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used for all simulation randomness.
pub type StreamRng = ChaCha8Rng;

/// What a stream is used for. The discriminant is the ChaCha stream id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Purpose {
    Adversary = 1,
    Environment = 2,
    Player = 3,
    /// Randomness of a player nested inside another player, such as the
    /// hidden-bandit player driven by the policy reduction.
    InnerPlayer = 4,
    /// Randomised reward construction (lower-bound instance rounding).
    Instance = 5,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream for the cell `(horizon, seed_index)` of an experiment keyed by `master`.
pub fn stream(master: u64, horizon: u64, seed_index: u64, purpose: Purpose) -> StreamRng {
    let mut state = master;
    let a = splitmix64(&mut state);
    state ^= horizon.rotate_left(17);
    let b = splitmix64(&mut state);
    state ^= seed_index.rotate_left(41);
    let c = splitmix64(&mut state);
    let d = splitmix64(&mut state);
    let mut key = [0u8; 32];
    for (chunk, word) in key.chunks_exact_mut(8).zip([a, b, c, d]) {
        chunk.copy_from_slice(&word.to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(purpose as u64);
    rng
}

/// A standalone stream, for tests and one-off draws.
pub fn seeded(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}
