//! Error bounds for a fixed profile, next to the block-code baselines.
//!
//! ```text
//! cargo run --release --example bounds
//! ```

use cort::bounds::{d_cle_m_exact, d_e_g, gallager_reference_bsc, rcu_exact_bsc, tau_distribution, MomentTables};
use cort::measure::CostModel;
use cort::tree_code::TreeProfile;

fn main() -> cort::Result<()> {
    let (n, k, p) = (64, 32, 0.03);
    // Four stages of eight bits.
    let arrivals: Vec<usize> = (0..k).map(|j| 1 + 12 * (j / 8)).collect();
    let profile = TreeProfile::from_arrivals(n, &arrivals)?;
    let tau = tau_distribution(&profile);
    println!(
        "branch times {:?}, divergence weights {:?}",
        profile.branch_times(),
        tau.weights.iter().map(|w| format!("{w:.3e}")).collect::<Vec<_>>()
    );

    let cm = CostModel::bsc(p, 1.0, n)?;
    let tables = MomentTables::with_default_grid(&cm);
    println!(
        "{:>13} {:>11} {:>11} {:>11} {:>11}",
        "L", "D_CLE", "D_CFE", "D_E", "exact CLE"
    );
    for limit in [1u64 << 20, 1 << 26, 1 << 32, 1 << 38] {
        let r = d_e_g(&profile, limit, &tables);
        let exact = d_cle_m_exact(&profile, &cm, limit)?;
        println!(
            "{limit:>13} {:>11.3e} {:>11.3e} {:>11.3e} {exact:>11.3e}",
            r.d_cle_g, r.d_cfe_g, r.d_e_g
        );
    }

    let pure = d_e_g(&TreeProfile::pure(n, k)?, u64::MAX, &tables);
    let gallager = gallager_reference_bsc(n, k, p, tables.grid());
    println!(
        "pure code free part   {:.3e} at rho = {:.3}",
        pure.d_cfe_g, pure.rho_star
    );
    println!(
        "Gallager bound        {:.3e} at rho = {:.3}",
        gallager.value, gallager.param
    );
    println!("RCU bound             {:.3e}", rcu_exact_bsc(n, k, p)?);
    Ok(())
}
