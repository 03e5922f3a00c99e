//! Deterministic random streams.
//!
//! Every consumer draws from ChaCha8 (`rand_chacha`), keyed by a 64-bit seed
//! (expanded with `SeedableRng::seed_from_u64`) and a stream id selected with
//! `set_stream`. Streams with the same seed never overlap, so walk sampling
//! and random initial states cannot perturb each other. Uniform doubles use
//! the top 53 bits of a `u64`: `(x >> 11) * 2^-53`, which lies in `[0, 1)`.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Stream used by Markov-chain walk sampling.
pub const WALK_STREAM: u64 = 0;
/// Stream used for random initial state vectors.
pub const INITIAL_STATE_STREAM: u64 = 1;
/// Stream used for start vectors of deflated power iterations.
pub const DEFLATION_STREAM: u64 = 2;

pub type StreamRng = ChaCha8Rng;

pub fn seeded(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform double in `[0, 1)` with 53 random mantissa bits.
pub fn uniform(rng: &mut StreamRng) -> f64 {
    const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
    (rng.next_u64() >> 11) as f64 * SCALE
}

/// Uniform integer in `lo..=hi`, by scaling a 53-bit uniform.
pub fn uniform_int(rng: &mut StreamRng, lo: i64, hi: i64) -> i64 {
    assert!(lo <= hi);
    let span = (hi - lo + 1) as f64;
    let k = (uniform(rng) * span).floor() as i64;
    lo + k.min(hi - lo)
}
