//! Reproducible Gaussian measurement noise.
//!
//! The generator is ChaCha20 (`rand_chacha::ChaCha20Rng`) keyed by the seed
//! as a little-endian `u64` in the first eight key bytes, remaining bytes zero.
//! Each normal draw consumes two `u64` outputs `a, b`, maps them to
//! `u = ((x >> 11) + 1) / 2^53` in `(0, 1]`, and returns the Box-Muller value
//! `sqrt(-2 ln u₁) cos(2π u₂)`. A draw happens even when `sigma = 0`.

use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    /// Terminal-voltage standard deviation (V).
    pub sigma_v: f64,
    /// Expansion standard deviation (m).
    pub sigma_dt: f64,
    pub seed: u64,
}

impl NoiseConfig {
    pub const DEFAULT_SIGMA_V: f64 = 1e-3;
    pub const DEFAULT_SIGMA_DT: f64 = 1e-6;

    pub fn none(seed: u64) -> Self {
        Self {
            sigma_v: 0.0,
            sigma_dt: 0.0,
            seed,
        }
    }

    pub fn standard(seed: u64) -> Self {
        Self {
            sigma_v: Self::DEFAULT_SIGMA_V,
            sigma_dt: Self::DEFAULT_SIGMA_DT,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, s) in [("sigma_v", self.sigma_v), ("sigma_dt", self.sigma_dt)] {
            if !(s.is_finite() && s >= 0.0) {
                return Err(Error::Invariant(format!(
                    "{name} must be finite and >= 0, got {s}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct NoiseSource {
    rng: ChaCha20Rng,
}

impl NoiseSource {
    pub fn new(seed: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        Self {
            rng: ChaCha20Rng::from_seed(key),
        }
    }

    fn unit(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) + 1) as f64 / (1u64 << 53) as f64
    }

    pub fn standard_normal(&mut self) -> f64 {
        let u1 = self.unit();
        let u2 = self.unit();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

/// `value + sigma z`; the generator advances whatever `sigma` is.
pub fn add_noise(value: f64, sigma: f64, rng: &mut NoiseSource) -> f64 {
    let z = rng.standard_normal();
    if sigma == 0.0 {
        value
    } else {
        value + sigma * z
    }
}
