//! Greedy bit placement: grow a profile one bit at a time.
//!
//! ```text
//! cargo run --release --example optimize_profile [limit]
//! ```

use cort::bounds::MomentTables;
use cort::measure::CostModel;
use cort::sbp::sbp_optimize;

fn main() -> cort::Result<()> {
    let limit: u64 = std::env::args()
        .nth(1)
        .map_or(4096, |a| a.parse().expect("limit must be an integer"));
    let (n, k, p) = (32, 8, 0.05);
    let tables = MomentTables::with_default_grid(&CostModel::bsc(p, 1.0, n)?);
    let trace = sbp_optimize(n, k, limit, &tables)?;
    for st in &trace.steps {
        println!(
            "bit {:>2} at t = {:>2}: D_E {:.3e} (CLE {:.3e}, CFE {:.3e})",
            st.step + 1,
            st.position,
            st.d_e_g,
            st.d_cle_g,
            st.d_cfe_g
        );
    }
    let profile = trace.profile();
    println!("s(t) = {:?}", profile.s());
    println!("arrivals = {:?}", profile.arrivals());
    Ok(())
}
