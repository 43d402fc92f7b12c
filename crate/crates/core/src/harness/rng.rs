//! Counter-based random stream with a fixed, documented bitstream.
//!
//! A trial seed is `SHA-256("tracelab/trial/v1" ‖ 0x00 ‖ master_seed as u64 LE ‖
//! stream ‖ 0x00 ‖ index as u64 LE)`. The 32 bytes key a ChaCha20 block function
//! (20 rounds, stream 0, block counter from 0); output words are read in order,
//! and a `u64` is two consecutive words, low word first.
//!
//! Derived draws:
//! - uniform on `[0, 1)`: `(u64 >> 11) · 2⁻⁵³`;
//! - uniform on `(0, 1]`: `((u64 >> 11) + 1) · 2⁻⁵³`;
//! - integer below `m`: rejection of `u64` values at or above the largest multiple of `m`, then `% m`;
//! - standard normal: Box–Muller on `u₁ ∈ (0,1]`, `u₂ ∈ [0,1)`, returning
//!   `√(-2 ln u₁) cos(2πu₂)` and caching `√(-2 ln u₁) sin(2πu₂)` for the next call;
//! - standard complex normal: real and imaginary parts each `N(0, 1/2)`, real first.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

use crate::algebra::C64;

/// Version string stored alongside every campaign.
pub const RNG_VERSION: &str = "tracelab-chacha20-v1";

const SEED_DOMAIN: &[u8] = b"tracelab/trial/v1";

pub type Seed = [u8; 32];

/// Seed for trial `index` of `stream` under `master_seed`.
pub fn trial_seed(master_seed: u64, stream: &str, index: u64) -> Seed {
    let mut h = Sha256::new();
    h.update(SEED_DOMAIN);
    h.update([0u8]);
    h.update(master_seed.to_le_bytes());
    h.update(stream.as_bytes());
    h.update([0u8]);
    h.update(index.to_le_bytes());
    h.finalize().into()
}

pub struct TrialRng {
    core: ChaCha20Rng,
    spare: Option<f64>,
}

impl TrialRng {
    pub fn from_seed(seed: Seed) -> Self {
        TrialRng {
            core: ChaCha20Rng::from_seed(seed),
            spare: None,
        }
    }

    /// Shorthand for stream `""`, trial 0 of `master_seed`.
    pub fn from_u64(master_seed: u64) -> Self {
        Self::from_seed(trial_seed(master_seed, "", 0))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.core.next_u64()
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * f64::EPSILON / 2.0
    }

    pub fn uniform_open_closed(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * f64::EPSILON / 2.0
    }

    /// Uniform on `[lo, hi)`; `lo` when the interval is empty.
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform integer in `0..m`.
    pub fn below(&mut self, m: u64) -> u64 {
        assert!(m > 0, "empty range");
        let zone = u64::MAX - (u64::MAX % m);
        loop {
            let u = self.next_u64();
            if u < zone {
                return u % m;
            }
        }
    }

    /// Uniform integer in `lo..=hi`.
    pub fn int_in(&mut self, lo: usize, hi: usize) -> usize {
        lo + self.below((hi - lo) as u64 + 1) as usize
    }

    pub fn gaussian(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.uniform_open_closed();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = std::f64::consts::TAU * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }

    pub fn complex_gaussian(&mut self) -> C64 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let re = self.gaussian() * s;
        let im = self.gaussian() * s;
        C64::new(re, im)
    }
}
