//! Discounted Hamming cost for the BSC.
//!
//! A mismatch at time `t` costs `d_t = γ^(t-1) Δ` with `Δ = log2((1-p)/p)`.
//! At `γ = 1` this is the negative log-likelihood ratio against the all-correct
//! hypothesis, so cost order equals likelihood order.

use serde::Serialize;

use crate::channel::BscChannel;
use crate::error::{param, Error, Result};
use crate::rng::CounterRng;

/// `γ^n` below this switches accumulation to compensated summation.
pub const COMPENSATION_THRESHOLD: f64 = 1e-6;

/// Per-symbol additive cost, the interface checked by [`check_aec`].
pub trait SymbolCost {
    /// Number of time indices covered.
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cost contributed at time `t` (1-based) by coded bit `x` against received bit `y`.
    fn symbol_cost(&self, t: usize, x: u8, y: u8) -> f64;
}

/// Discounted cost measure over `n` time indices.
#[derive(Debug, Clone, Serialize)]
pub struct CostModel {
    gamma: f64,
    channel: BscChannel,
    per_symbol: Vec<f64>,
    compensated: bool,
}

impl CostModel {
    pub fn new(channel: BscChannel, gamma: f64, n: usize) -> Result<Self> {
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(param("gamma", format!("discount must lie in (0, 1], got {gamma}")));
        }
        let mut per_symbol = Vec::with_capacity(n);
        let mut w = channel.llr_scale();
        for _ in 0..n {
            per_symbol.push(w);
            w *= gamma;
        }
        let compensated = gamma.powi(n as i32) < COMPENSATION_THRESHOLD;
        Ok(Self {
            gamma,
            channel,
            per_symbol,
            compensated,
        })
    }

    /// Convenience constructor from `p`.
    pub fn bsc(p: f64, gamma: f64, n: usize) -> Result<Self> {
        Self::new(BscChannel::new(p)?, gamma, n)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn channel(&self) -> &BscChannel {
        &self.channel
    }

    pub fn p(&self) -> f64 {
        self.channel.p()
    }

    pub fn n(&self) -> usize {
        self.per_symbol.len()
    }

    /// `d_t` for `t = 1..=n` at index `t - 1`.
    pub fn per_symbol_cost(&self) -> &[f64] {
        &self.per_symbol
    }

    pub fn is_compensated(&self) -> bool {
        self.compensated
    }

    /// Copy with every per-symbol cost multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Self {
        assert!(factor > 0.0);
        Self {
            per_symbol: self.per_symbol.iter().map(|w| w * factor).collect(),
            ..self.clone()
        }
    }

    /// `Σ_{t ≤ |x|} d_t 1{x_t ≠ y_t}`.
    pub fn prefix_cost(&self, x_prefix: &[u8], y: &[u8]) -> Result<f64> {
        if x_prefix.len() > y.len() {
            return Err(Error::LengthMismatch {
                expected: y.len(),
                found: x_prefix.len(),
            });
        }
        self.extend_cost(0.0, x_prefix, &y[..x_prefix.len()], 1)
    }

    /// Adds the cost of `x_segment` against `y_segment` placed at times `t_start..`.
    pub fn extend_cost(&self, base_cost: f64, x_segment: &[u8], y_segment: &[u8], t_start: usize) -> Result<f64> {
        if x_segment.len() != y_segment.len() {
            return Err(Error::LengthMismatch {
                expected: y_segment.len(),
                found: x_segment.len(),
            });
        }
        if t_start == 0 || t_start - 1 + x_segment.len() > self.n() {
            return Err(param("t_start", "segment extends outside 1..=n"));
        }
        let weights = &self.per_symbol[t_start - 1..];
        let mismatches = x_segment
            .iter()
            .zip(y_segment)
            .zip(weights)
            .filter(|((x, y), _)| (**x ^ **y) & 1 == 1)
            .map(|(_, &w)| w);
        Ok(if self.compensated {
            neumaier(base_cost, mismatches)
        } else {
            mismatches.fold(base_cost, |acc, w| acc + w)
        })
    }

    /// Cost accumulated over times `from..=to` by the packed mismatch test `mismatch(t)`.
    #[inline]
    pub(crate) fn accumulate(&self, base: f64, from: usize, to: usize, mut mismatch: impl FnMut(usize) -> bool) -> f64 {
        if self.compensated {
            neumaier(
                base,
                (from..=to).filter(|&t| mismatch(t)).map(|t| self.per_symbol[t - 1]),
            )
        } else {
            let mut acc = base;
            for t in from..=to {
                if mismatch(t) {
                    acc += self.per_symbol[t - 1];
                }
            }
            acc
        }
    }
}

impl SymbolCost for CostModel {
    fn len(&self) -> usize {
        self.n()
    }

    fn symbol_cost(&self, t: usize, x: u8, y: u8) -> f64 {
        if (x ^ y) & 1 == 1 {
            self.per_symbol[t - 1]
        } else {
            0.0
        }
    }
}

fn neumaier(base: f64, terms: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (base, 0.0);
    for v in terms {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Samples `trials` uniform `(x, y)` pairs of length `n` and checks that every
/// prefix cost is no larger than any longer prefix cost.
pub fn check_aec<M: SymbolCost + ?Sized>(measure: &M, trials: usize, n: usize, seed: u64) -> bool {
    let n = n.min(measure.len());
    let mut rng = CounterRng::new(seed);
    (0..trials).all(|_| {
        let x: Vec<u8> = (0..n).map(|_| rng.bits(1) as u8).collect();
        let y: Vec<u8> = (0..n).map(|_| rng.bits(1) as u8).collect();
        prefixes_monotone(measure, &x, &y)
    })
}

/// Exhaustive form of [`check_aec`] over all `4^n` pairs; intended for `n <= 12`.
pub fn check_aec_exhaustive<M: SymbolCost + ?Sized>(measure: &M, n: usize) -> bool {
    assert!(n <= 16, "exhaustive check is exponential in n");
    let n = n.min(measure.len());
    let unpack = |w: u32| -> Vec<u8> { (0..n).map(|i| ((w >> i) & 1) as u8).collect() };
    (0u32..1 << n).all(|xw| {
        let x = unpack(xw);
        (0u32..1 << n).all(|yw| prefixes_monotone(measure, &x, &unpack(yw)))
    })
}

fn prefixes_monotone<M: SymbolCost + ?Sized>(measure: &M, x: &[u8], y: &[u8]) -> bool {
    // Costs at every prefix length; the running minimum of later prefixes must dominate.
    let mut costs = Vec::with_capacity(x.len() + 1);
    let mut acc = 0.0;
    costs.push(acc);
    for t in 0..x.len() {
        acc += measure.symbol_cost(t + 1, x[t], y[t]);
        costs.push(acc);
    }
    let mut later_min = f64::INFINITY;
    for c in costs.iter().rev() {
        if *c > later_min {
            return false;
        }
        later_min = later_min.min(*c);
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn per_symbol_geometry() {
        let cm = CostModel::bsc(0.03, 0.9992, 128).unwrap();
        let w = cm.per_symbol_cost();
        for t in 1..w.len() {
            assert!(w[t] > 0.0 && w[t] < w[t - 1]);
            assert!((w[t] - 0.9992 * w[t - 1]).abs() <= 1e-12 * w[t]);
        }
        let flat = CostModel::bsc(0.03, 1.0, 16).unwrap();
        assert!(flat.per_symbol_cost().windows(2).all(|p| p[0] == p[1]));
        assert!(!cm.is_compensated());
        assert!(CostModel::bsc(0.03, 0.5, 64).unwrap().is_compensated());
    }

    #[test]
    fn rejects_bad_gamma() {
        assert!(CostModel::bsc(0.1, 0.0, 4).is_err());
        assert!(CostModel::bsc(0.1, 1.01, 4).is_err());
    }

    #[test]
    fn prefix_cost_cases() {
        let cm = CostModel::bsc(0.03, 1.0, 8).unwrap();
        let delta = (0.97f64 / 0.03).log2();
        assert_eq!(cm.prefix_cost(&[1, 0, 1], &[1, 0, 1, 1]).unwrap(), 0.0);
        for t in 0..8 {
            let mut x = vec![0u8; 8];
            x[t] = 1;
            assert!((cm.prefix_cost(&x, &[0; 8]).unwrap() - delta).abs() < 1e-12);
        }
        let half = CostModel::bsc(0.03, 0.5, 4).unwrap();
        assert!((half.prefix_cost(&[1, 1], &[0, 0, 0, 0]).unwrap() - 1.5 * delta).abs() < 1e-12);
        assert!(cm.prefix_cost(&[0; 5], &[0; 4]).is_err());
    }

    #[test]
    fn extend_cost_cases() {
        let cm = CostModel::bsc(0.03, 1.0, 8).unwrap();
        assert_eq!(cm.extend_cost(2.5, &[], &[], 3).unwrap(), 2.5);
        let two = cm.extend_cost(0.0, &[1, 1], &[0, 0], 1).unwrap();
        assert!((two - 2.0 * cm.channel().llr_scale()).abs() < 1e-12);
        assert!(cm.extend_cost(0.0, &[1], &[0, 0], 1).is_err());
    }

    struct Negative;

    impl SymbolCost for Negative {
        fn len(&self) -> usize {
            8
        }

        fn symbol_cost(&self, t: usize, x: u8, y: u8) -> f64 {
            let w = if t == 5 { -1.0 } else { 1.0 };
            if x != y {
                w
            } else {
                0.0
            }
        }
    }

    #[test]
    fn aec_holds_and_fixture_fails() {
        let cm = CostModel::bsc(0.02, 0.9992, 64).unwrap();
        assert!(check_aec(&cm, 10_000, 64, 1));
        assert!(!check_aec(&Negative, 200, 8, 1));
        assert!(!check_aec_exhaustive(&Negative, 8));
    }
}
