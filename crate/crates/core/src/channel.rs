//! Memoryless binary-input channels.

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::rng::{derive_key, CounterRng};
use crate::stats::binomial_pmf;

const TAG_NOISE: u64 = 0x6E6F_6973_6500_0000;

/// A binary-input channel described by per-symbol likelihoods.
pub trait BinaryChannel {
    /// `P(y | x)` for a single use at time `t` (1-based), given the past outputs.
    fn likelihood(&self, t: usize, x: u8, y: u8, past_y: &[u8]) -> f64;

    /// Joint `P(y_{1:n} | x_{1:n})` evaluated by chaining the per-symbol likelihoods.
    fn joint_likelihood(&self, x: &[u8], y: &[u8]) -> f64 {
        assert_eq!(x.len(), y.len());
        (0..x.len())
            .map(|i| self.likelihood(i + 1, x[i], y[i], &y[..i]))
            .product()
    }
}

/// Binary symmetric channel with crossover probability `p` in `(0, 1/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BscChannel {
    p: f64,
    llr_scale: f64,
}

impl BscChannel {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 0.5) {
            return Err(param(
                "p",
                format!("crossover probability must lie in (0, 0.5), got {p}"),
            ));
        }
        Ok(Self {
            p,
            llr_scale: ((1.0 - p) / p).log2(),
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// `Δ = log2((1 - p) / p)`.
    pub fn llr_scale(&self) -> f64 {
        self.llr_scale
    }

    /// Error pattern of length `n` drawn from the stream keyed by `seed`.
    pub fn error_pattern(&self, n: usize, seed: u64) -> Vec<u8> {
        let mut rng = CounterRng::new(derive_key(seed, TAG_NOISE));
        (0..n).map(|_| rng.bernoulli(self.p) as u8).collect()
    }

    /// `y_t = x_t XOR e_t` with i.i.d. Bernoulli(p) flips.
    pub fn transmit(&self, x: &[u8], seed: u64) -> Vec<u8> {
        self.error_pattern(x.len(), seed)
            .into_iter()
            .zip(x)
            .map(|(e, &b)| e ^ (b & 1))
            .collect()
    }

    /// `Pr(W = w)` for `w = 0..=n`.
    pub fn error_weight_distribution(&self, n: usize) -> Vec<f64> {
        binomial_pmf(n, self.p)
    }
}

impl BinaryChannel for BscChannel {
    fn likelihood(&self, _t: usize, x: u8, y: u8, _past_y: &[u8]) -> f64 {
        if x == y {
            1.0 - self.p
        } else {
            self.p
        }
    }

    fn joint_likelihood(&self, x: &[u8], y: &[u8]) -> f64 {
        assert_eq!(x.len(), y.len());
        let d = x.iter().zip(y).filter(|(a, b)| a != b).count() as i32;
        self.p.powi(d) * (1.0 - self.p).powi(x.len() as i32 - d)
    }
}
