//! Counter-based random substreams.
//!
//! Every (grid point, epoch) pair owns a ChaCha8 stream selected by the seed
//! and a 64-bit stream id; the k-th draw is the k-th 64-bit word of that
//! stream. Results therefore do not depend on how epochs are scheduled across
//! workers.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::normal;

const TWO_POW_M53: f64 = 1.0 / (1u64 << 53) as f64;

#[derive(Clone, Debug)]
pub struct RngStream {
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, grid_index: u32, epoch: u32) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream((u64::from(grid_index) << 32) | u64::from(epoch));
        Self { rng }
    }

    /// Positions the stream so the next draw is draw number `k`.
    pub fn seek(&mut self, k: u64) {
        self.rng.set_word_pos(2 * u128::from(k));
    }

    pub fn next_bits(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform draw in [0, 1) with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_bits() >> 11) as f64 * TWO_POW_M53
    }

    /// Standard normal draw by inverse-CDF transform of the bin midpoint, which
    /// keeps the argument strictly inside (0, 1).
    pub fn gaussian(&mut self) -> f64 {
        let u = ((self.next_bits() >> 11) as f64 + 0.5) * TWO_POW_M53;
        normal::quantile(u)
    }
}
