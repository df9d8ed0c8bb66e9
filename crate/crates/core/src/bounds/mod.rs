//! Achievability bounds for tree codes under the discounted cost measure.
//!
//! The error probability splits into a computation-limit part (the decoder
//! gives up) and a computation-free part (a wrong terminal beats the true one).
//! Both are relaxed with shared Chernoff exponents minimized over a grid on
//! `[0, 1]`; `ϑ = 1/(1+ϱ)` for the limit part and `θ = 1/(1+ρ)` for the free part.
//!
//! Limit part, with `L` the node-check budget:
//!
//! ```text
//! D_CLE = min_ϱ Σ_{h<h_f} Σ_{h'≤h} v_{h;h'} · ( Π_{t=b_{h'+1}}^{r_[h]} abar_t · Π_{t=b_{h'+1}}^{n} a_t )^ϱ
//! v_{h;h'} = 2^{s(b_{h+1})} · Pr(τ_h = b_{h'}) / L
//! ```
//!
//! Terms with an empty `abar` range are probability-one events and enter at
//! their weight. The `h = 0` row is the single term `c_0 / L`.
//!
//! Free part, with `w_h = 2^k Pr(τ = b_h)`:
//!
//! ```text
//! D_CFE = min_ρ Σ_{h<h_f} ( w_h · Π_{t=b_{h+1}}^{n} abar_t a_t )^ρ
//! ```

mod exact;
mod moments;
mod tau;

use serde::Serialize;

pub use exact::{d_cle_m_exact, expected_checks_bound, gallager_reference_at, gallager_reference_bsc, rcu_exact_bsc};
pub use moments::{moment_a, moment_abar, theta_of, uniform_grid, MomentTables};
pub use tau::{tau_distribution, tau_h_distribution, TauDistribution};

use crate::tree_code::{ProfileDoc, TreeProfile};

/// Grid size used when none is given.
pub const DEFAULT_GRID_POINTS: usize = 10;

/// Minimum of a function sampled on the grid. Ties go to the smallest grid value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridMin {
    pub value: f64,
    pub index: usize,
    pub param: f64,
}

impl GridMin {
    fn of(values: &[f64], grid: &[f64]) -> Self {
        let mut best = 0;
        for (i, v) in values.iter().enumerate().skip(1) {
            if *v < values[best] {
                best = i;
            }
        }
        Self {
            value: values[best],
            index: best,
            param: grid[best],
        }
    }
}

fn check_tables(profile: &TreeProfile, tables: &MomentTables) {
    assert_eq!(
        profile.n(),
        tables.n(),
        "moment tables built for n = {} used with n = {}",
        tables.n(),
        profile.n()
    );
}

/// Per-grid-point values of the limit part before minimization.
pub fn d_cle_g_curve(profile: &TreeProfile, limit: u64, tables: &MomentTables) -> Vec<f64> {
    check_tables(profile, tables);
    let grid = tables.grid();
    let n = profile.n();
    let log_l = (limit as f64).log2();
    let hf = profile.num_stages();

    // Probability-one terms, identical at every grid point.
    let mut flat = (profile.fanout_bits(0) as f64 - log_l).exp2();
    let mut sums = vec![0.0; grid.len()];
    for h in 1..hf {
        let lw = profile.stage_level(h + 1) as f64 - log_l;
        let end_bar = profile.stage_end(h);
        for (hp, lt) in tau::log_tau_h(profile, h).into_iter().enumerate() {
            let logv = lw + lt;
            let start = profile.branch_time(hp + 1);
            if start > end_bar {
                flat += logv.exp2();
                continue;
            }
            for (g, &x) in grid.iter().enumerate() {
                let e = tables.range_log_abar(g, start, end_bar) + tables.range_log_a(g, start, n);
                sums[g] += (logv + x * e).exp2();
            }
        }
    }
    sums.iter().map(|s| s + flat).collect()
}

/// Computation-limit part, minimized over the grid.
pub fn d_cle_g(profile: &TreeProfile, limit: u64, tables: &MomentTables) -> GridMin {
    GridMin::of(&d_cle_g_curve(profile, limit, tables), tables.grid())
}

/// Per-grid-point values of the free part before minimization.
pub fn d_cfe_g_curve(profile: &TreeProfile, tables: &MomentTables) -> Vec<f64> {
    check_tables(profile, tables);
    let n = profile.n();
    let tau = tau_distribution(profile);
    let mut sums = vec![0.0; tables.grid().len()];
    for h in 0..profile.num_stages() {
        let start = profile.stage_start(h);
        for (g, &x) in tables.grid().iter().enumerate() {
            let e = tables.range_log_abar(g, start, n) + tables.range_log_a(g, start, n);
            sums[g] += (x * (tau.log_weights[h] + e)).exp2();
        }
    }
    sums
}

/// Computation-free part, minimized over the grid.
pub fn d_cfe_g(profile: &TreeProfile, tables: &MomentTables) -> GridMin {
    GridMin::of(&d_cfe_g_curve(profile, tables), tables.grid())
}

/// Evaluated bound with its configuration echoed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub profile: ProfileDoc,
    pub n: usize,
    pub k: usize,
    pub p: f64,
    pub gamma: f64,
    pub limit: u64,
    pub grid_points: usize,
    pub d_cle_g: f64,
    pub d_cfe_g: f64,
    /// `d_cle_g + d_cfe_g`, unclipped.
    pub d_e_g: f64,
    pub varrho_star: f64,
    pub rho_star: f64,
}

/// Column names of [`BoundReport::csv_row`].
pub const CSV_HEADER: &str = "n,k,p,gamma,L,d_cle_g,d_cfe_g,d_e_g,varrho,rho";

impl BoundReport {
    /// Probabilities clipped at 1 for presentation.
    pub fn d_cle_g_clipped(&self) -> f64 {
        self.d_cle_g.min(1.0)
    }

    pub fn d_cfe_g_clipped(&self) -> f64 {
        self.d_cfe_g.min(1.0)
    }

    pub fn d_e_g_clipped(&self) -> f64 {
        self.d_e_g.min(1.0)
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{:e},{:e},{},{:e},{:e},{:e},{:e},{:e}",
            self.n,
            self.k,
            self.p,
            self.gamma,
            self.limit,
            self.d_cle_g,
            self.d_cfe_g,
            self.d_e_g,
            self.varrho_star,
            self.rho_star
        )
    }
}

/// Both parts with independently optimized exponents.
pub fn d_e_g(profile: &TreeProfile, limit: u64, tables: &MomentTables) -> BoundReport {
    let cle = d_cle_g(profile, limit, tables);
    let cfe = d_cfe_g(profile, tables);
    BoundReport {
        profile: profile.to_doc(),
        n: profile.n(),
        k: profile.k(),
        p: tables.p(),
        gamma: tables.gamma(),
        limit,
        grid_points: tables.grid().len(),
        d_cle_g: cle.value,
        d_cfe_g: cfe.value,
        d_e_g: cle.value + cfe.value,
        varrho_star: cle.param,
        rho_star: cfe.param,
    }
}
