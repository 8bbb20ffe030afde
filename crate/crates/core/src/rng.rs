//! Deterministic RNG stream derivation.
//!
//! Every random draw in the simulator comes from a stream keyed by
//! `(seed, purpose, trial, user)`. Streams are independent of iteration
//! order and thread scheduling, so parallel Monte Carlo runs reproduce
//! bit-identical results for a fixed seed.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Stream purpose tags. Distinct purposes never share a stream even for
/// identical (seed, trial, user) triples.
pub mod purpose {
    /// Channel realizations (path counts, AoAs, gains).
    pub const CHANNEL: u64 = 1;
    /// First-user pick of the subspace-distance scheduler.
    pub const CHORDAL_INIT: u64 = 2;
    /// Random-scheduling baseline draws.
    pub const RANDOM_SCHED: u64 = 3;
}

/// splitmix64 step; the de-facto standard 64-bit mixer.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives an independent ChaCha8 stream from a seed and a tag path
/// (e.g. `[purpose::CHANNEL, trial, user]`). Tags are absorbed
/// sequentially so `[a, b]` and `[b, a]` give unrelated streams.
pub fn derive_rng(seed: u64, tags: &[u64]) -> ChaCha8Rng {
    let mut state = seed;
    // absorb: one mix step per tag, keyed by position
    for (i, &t) in tags.iter().enumerate() {
        state ^= t.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ ((i as u64) << 56);
        splitmix64(&mut state);
    }
    // squeeze a 256-bit key
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Standard complex Gaussian CN(0, 1): unit total variance split evenly
/// across real and imaginary parts.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) / 2f64.sqrt()
}
