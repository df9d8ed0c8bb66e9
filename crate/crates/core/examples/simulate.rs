//! Ensemble simulation of an optimized profile checked against its bounds.
//!
//! ```text
//! cargo run --release --example simulate [trials]
//! ```

use std::sync::Arc;

use cort::bounds::{d_cle_m_exact, d_e_g, expected_checks_bound, MomentTables};
use cort::measure::CostModel;
use cort::montecarlo::{simulate, TrialConfig};
use cort::sbp::sbp_optimize;

fn main() -> cort::Result<()> {
    let trials: u64 = std::env::args()
        .nth(1)
        .map_or(20_000, |a| a.parse().expect("trials must be an integer"));
    let (n, k, p, limit) = (32, 8, 0.05, 4096);
    let cm = CostModel::bsc(p, 1.0, n)?;
    let tables = MomentTables::with_default_grid(&cm);
    let profile = sbp_optimize(n, k, limit, &tables)?.profile();
    let bound = d_e_g(&profile, limit, &tables);
    let exact = d_cle_m_exact(&profile, &cm, limit)?;

    let stats = simulate(TrialConfig {
        profile: Arc::new(profile),
        p,
        gamma: 1.0,
        limit,
        trials,
        base_seed: 1,
        resample_code: true,
    })?;
    println!(
        "frame errors   {:.3e} ± {:.1e}  (bound {:.3e})",
        stats.fer, stats.fer_ci, bound.d_e_g
    );
    println!(
        "give-ups       {:.3e} ± {:.1e}  (bound {:.3e})",
        stats.giveup_rate, stats.giveup_ci, bound.d_cle_g
    );
    println!(
        "node checks    {:.2} ± {:.2}      (bound {:.2})",
        stats.mean_nodes_checked,
        stats.mean_nodes_ci,
        expected_checks_bound(exact, limit)
    );
    println!(
        "worst case     {} checks, stack {}",
        stats.max_nodes_checked, stats.max_stack_size
    );
    Ok(())
}
