//! Exact binomial evaluations and the classical baselines.

use super::tau::log_tau_h;
use super::GridMin;
use crate::error::{param, Result};
use crate::measure::CostModel;
use crate::stats::{binomial_cdf, binomial_pmf};
use crate::tree_code::TreeProfile;

/// Largest block length accepted by the binomial-table evaluations.
pub const MAX_EXACT_BLOCK: usize = 512;

/// `Pr(Bin(l1, 1/2) <= Bin(l2, p))` with independent variables.
fn competitor_wins(l1: usize, l2: usize, p: f64) -> f64 {
    if l1 == 0 {
        return 1.0;
    }
    let cdf = binomial_cdf(l1, 0.5);
    binomial_pmf(l2, p)
        .iter()
        .enumerate()
        .map(|(w, pw)| pw * cdf[w.min(l1)])
        .sum()
}

/// Limit part without Chernoff relaxation, for the undiscounted measure.
///
/// Sums `2^{s(b_{h+1})} Pr(τ_h = b_{h'}) / L · Pr(Bin(l1, 1/2) <= Bin(l2, p))` with
/// `l1 = r_[h] - b_{h'+1} + 1` competitor-only symbols and `l2 = n - b_{h'+1} + 1`
/// symbols of the transmitted path past the divergence.
pub fn d_cle_m_exact(profile: &TreeProfile, cm: &CostModel, limit: u64) -> Result<f64> {
    if cm.gamma() != 1.0 {
        return Err(param("gamma", "the exact limit part requires gamma = 1"));
    }
    if cm.n() != profile.n() {
        return Err(param("cm", "cost model length differs from the block length"));
    }
    let n = profile.n();
    let log_l = (limit as f64).log2();
    let mut total = (profile.fanout_bits(0) as f64 - log_l).exp2();
    for h in 1..profile.num_stages() {
        let lw = profile.stage_level(h + 1) as f64 - log_l;
        let end_bar = profile.stage_end(h);
        for (hp, lt) in log_tau_h(profile, h).into_iter().enumerate() {
            let start = profile.branch_time(hp + 1);
            let l1 = (end_bar + 1).saturating_sub(start);
            let l2 = n + 1 - start;
            total += (lw + lt).exp2() * competitor_wins(l1, l2, cm.p());
        }
    }
    Ok(total)
}

/// `D · L`, an upper bound on the mean number of node checks.
pub fn expected_checks_bound(d_cle_m: f64, limit: u64) -> f64 {
    d_cle_m * limit as f64
}

/// Random-coding union bound for uniform random codes on the BSC:
/// `Σ_w Pr(W = w) · min{1, (2^k - 1) Pr(Bin(n, 1/2) <= w)}`.
pub fn rcu_exact_bsc(n: usize, k: usize, p: f64) -> Result<f64> {
    if n == 0 || n > MAX_EXACT_BLOCK {
        return Err(param("n", format!("block length must lie in 1..={MAX_EXACT_BLOCK}")));
    }
    if !(p > 0.0 && p < 0.5) {
        return Err(param("p", "crossover probability must lie in (0, 0.5)"));
    }
    let competitors = (k as f64).exp2() - 1.0;
    let cdf = binomial_cdf(n, 0.5);
    Ok(binomial_pmf(n, p)
        .iter()
        .zip(&cdf)
        .map(|(pw, c)| pw * (competitors * c).min(1.0))
        .sum())
}

/// Gallager's random-coding bound for the BSC with uniform inputs at a fixed `ρ`:
/// `(2^k - 1)^ρ [Σ_y (Σ_x 1/2 P(y|x)^{1/(1+ρ)})^{1+ρ}]^n`.
pub fn gallager_reference_at(n: usize, k: usize, p: f64, rho: f64) -> f64 {
    let theta = 1.0 / (1.0 + rho);
    let channel = [[1.0 - p, p], [p, 1.0 - p]];
    let e0: f64 = (0..2)
        .map(|y| {
            let inner: f64 = (0..2).map(|x| 0.5 * channel[x][y].powf(theta)).sum();
            inner.powf(1.0 + rho)
        })
        .sum();
    let log_m = k as f64 + super::moments::log2_one_minus_pow2(k as f64);
    (rho * log_m + n as f64 * e0.log2()).exp2()
}

/// [`gallager_reference_at`] minimized over `rho_grid`.
pub fn gallager_reference_bsc(n: usize, k: usize, p: f64, rho_grid: &[f64]) -> GridMin {
    let values: Vec<f64> = rho_grid.iter().map(|&r| gallager_reference_at(n, k, p, r)).collect();
    GridMin::of(&values, rho_grid)
}
