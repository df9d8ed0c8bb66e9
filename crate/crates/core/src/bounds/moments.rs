//! Per-symbol Chernoff moments with log2 prefix sums.

use crate::measure::CostModel;

/// `k + log2(1 - 2^-k)`-style helper: `log2(1 - 2^-a)` for `a > 0`.
#[inline]
pub(crate) fn log2_one_minus_pow2(a: f64) -> f64 {
    (-(-a).exp2()).ln_1p() / std::f64::consts::LN_2
}

/// `log2(2^-a - 2^-b)` for `b > a`.
#[inline]
pub(crate) fn log2_pow2_diff(a: f64, b: f64) -> f64 {
    -a + log2_one_minus_pow2(b - a)
}

/// `m` evenly spaced points on `[0, 1]` including both endpoints.
pub fn uniform_grid(points: usize) -> Vec<f64> {
    assert!(points >= 2, "a grid needs at least two points");
    let last = (points - 1) as f64;
    (0..points).map(|i| i as f64 / last).collect()
}

/// `1 / (1 + x)`, mapping a grid value to its tilting exponent.
#[inline]
pub fn theta_of(x: f64) -> f64 {
    1.0 / (1.0 + x)
}

/// Moments of the discounted cost for the BSC with uniform inputs.
///
/// For grid value `x` with `ϑ = 1/(1+x)` and `d_t = γ^(t-1) Δ`:
/// `abar_t = 1/2 + 1/2 · 2^(-ϑ d_t)` (competitor symbol) and
/// `a_t = 1 - p + p · 2^(ϑ d_t)` (transmitted symbol).
#[derive(Debug, Clone)]
pub struct MomentTables {
    grid: Vec<f64>,
    n: usize,
    p: f64,
    gamma: f64,
    /// `[g][t]` = Σ_{i ≤ t} log2 abar_i, with index 0 the empty sum.
    abar_prefix: Vec<Vec<f64>>,
    a_prefix: Vec<Vec<f64>>,
}

impl MomentTables {
    pub fn new(cm: &CostModel, grid: &[f64]) -> Self {
        assert!(!grid.is_empty(), "grid must be non-empty");
        let p = cm.p();
        let mut abar_prefix = Vec::with_capacity(grid.len());
        let mut a_prefix = Vec::with_capacity(grid.len());
        for &x in grid {
            let th = theta_of(x);
            let mut pa = Vec::with_capacity(cm.n() + 1);
            let mut pb = Vec::with_capacity(cm.n() + 1);
            let (mut sa, mut sb) = (0.0, 0.0);
            pa.push(0.0);
            pb.push(0.0);
            for &d in cm.per_symbol_cost() {
                sa += moment_abar(th, d).log2();
                sb += moment_a(p, th, d).log2();
                pa.push(sa);
                pb.push(sb);
            }
            abar_prefix.push(pa);
            a_prefix.push(pb);
        }
        Self {
            grid: grid.to_vec(),
            n: cm.n(),
            p,
            gamma: cm.gamma(),
            abar_prefix,
            a_prefix,
        }
    }

    /// Tables on the default 10-point grid.
    pub fn with_default_grid(cm: &CostModel) -> Self {
        Self::new(cm, &uniform_grid(super::DEFAULT_GRID_POINTS))
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `log2 abar_t` at grid index `g`, `t` 1-based.
    pub fn log_moment_abar(&self, g: usize, t: usize) -> f64 {
        self.abar_prefix[g][t] - self.abar_prefix[g][t - 1]
    }

    /// `log2 a_t` at grid index `g`, `t` 1-based.
    pub fn log_moment_a(&self, g: usize, t: usize) -> f64 {
        self.a_prefix[g][t] - self.a_prefix[g][t - 1]
    }

    /// `Σ_{t=from}^{to} log2 abar_t`; zero for an empty range.
    #[inline]
    pub fn range_log_abar(&self, g: usize, from: usize, to: usize) -> f64 {
        if from > to {
            0.0
        } else {
            self.abar_prefix[g][to] - self.abar_prefix[g][from - 1]
        }
    }

    /// `Σ_{t=from}^{to} log2 a_t`; zero for an empty range.
    #[inline]
    pub fn range_log_a(&self, g: usize, from: usize, to: usize) -> f64 {
        if from > to {
            0.0
        } else {
            self.a_prefix[g][to] - self.a_prefix[g][from - 1]
        }
    }
}

/// `E[2^{-ϑ d}]` for a uniformly random competitor symbol.
#[inline]
pub fn moment_abar(theta: f64, d: f64) -> f64 {
    0.5 + 0.5 * (-theta * d).exp2()
}

/// `E[2^{ϑ d}]` for the transmitted symbol through a BSC with crossover `p`.
#[inline]
pub fn moment_a(p: f64, theta: f64, d: f64) -> f64 {
    1.0 - p + p * (theta * d).exp2()
}
