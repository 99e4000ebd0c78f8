//! Deterministic per-trial random number streams.
//!
//! One ChaCha8 generator keyed by the master seed; each trial gets its own
//! 64-bit stream id (ChaCha's stream counter), so the draw sequence of a
//! trial is identical on every platform and independent of how trials are
//! scheduled across workers.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Identifies one reproducible draw sequence: `(master_seed, stream_id)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self { master_seed, stream_id }
    }

    /// Instantiates the generator for this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Uniform draw from `{0, ..., m-1}` by rejection sampling on 64-bit words.
///
/// Accepts a word only below the largest multiple of `m`, so every residue
/// is exactly equally likely (no modulo bias).
pub fn uniform_index(rng: &mut ChaCha8Rng, m: usize) -> usize {
    debug_assert!(m >= 1);
    let m = m as u64;
    if m == 1 {
        return 0;
    }
    // 2^64 mod m, without 128-bit arithmetic.
    let rem = (u64::MAX % m + 1) % m;
    let limit = u64::MAX - rem;
    loop {
        let v = rng.next_u64();
        if v <= limit {
            return (v % m) as usize;
        }
    }
}
