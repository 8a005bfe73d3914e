//! AWGN channel model.

use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::math;
use crate::rng;

/// Additive white Gaussian noise with variance `sigma2` per real dimension.
///
/// For unit-energy symbols `Es/N0 = 1 / (2 sigma2)`; `Eb/N0` follows from the
/// nominal spectral efficiency `m R`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NoiseModel {
    sigma2: f64,
}

impl NoiseModel {
    /// # Panics
    /// If `sigma2` is not strictly positive.
    pub fn from_sigma2(sigma2: f64) -> Self {
        assert!(sigma2 > 0.0, "noise variance must be positive, got {sigma2}");
        Self { sigma2 }
    }

    pub fn from_es_n0_db(es_n0_db: f64) -> Self {
        Self::from_sigma2(1.0 / (2.0 * math::db_to_linear(es_n0_db)))
    }

    pub fn from_eb_n0_db(eb_n0_db: f64, rate: f64, bits: usize) -> Self {
        Self::from_es_n0_db(eb_n0_to_es_n0_db(eb_n0_db, rate, bits))
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn sigma(&self) -> f64 {
        math::sqrt(self.sigma2)
    }

    pub fn es_n0(&self) -> f64 {
        1.0 / (2.0 * self.sigma2)
    }

    pub fn es_n0_db(&self) -> f64 {
        math::linear_to_db(self.es_n0())
    }

    pub fn eb_n0_db(&self, rate: f64, bits: usize) -> f64 {
        es_n0_to_eb_n0_db(self.es_n0_db(), rate, bits)
    }

    /// The same noise seen by one unit-energy PAM half of a QAM: each half
    /// carries energy 1/2, so the equivalent variance doubles.
    pub fn per_component(&self) -> Self {
        Self::from_sigma2(2.0 * self.sigma2)
    }

    /// Natural-log likelihood `-|y - z|^2 / (2 sigma2)`, up to the constant
    /// normalization that cancels in every likelihood ratio.
    #[inline]
    pub fn log_likelihood(&self, y: Complex64, z: Complex64) -> f64 {
        -(y - z).norm_sqr() / (2.0 * self.sigma2)
    }

    /// `count` i.i.d. circular Gaussian samples, deterministic in `seed`.
    pub fn sample_noise(&self, count: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = rng::stream(seed, 0);
        let s = self.sigma();
        (0..count)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(s * re, s * im)
            })
            .collect()
    }
}

pub fn eb_n0_to_es_n0_db(eb_n0_db: f64, rate: f64, bits: usize) -> f64 {
    eb_n0_db + math::linear_to_db(rate * bits as f64)
}

pub fn es_n0_to_eb_n0_db(es_n0_db: f64, rate: f64, bits: usize) -> f64 {
    es_n0_db - math::linear_to_db(rate * bits as f64)
}

/// Spectral efficiency of a frame of `slots` codewords when the scheme needs
/// `t_max` extra slots to flush delayed sub-blocks.
pub fn spectral_efficiency(bits: usize, rate: f64, slots: usize, t_max: u32) -> f64 {
    bits as f64 * rate * slots as f64 / (slots as f64 + t_max as f64)
}
