mod common;

use cort::bounds::{
    d_cfe_g, d_cle_g, d_cle_g_curve, d_e_g, gallager_reference_bsc, moment_a, moment_abar, tau_distribution,
    tau_h_distribution, theta_of, uniform_grid, MomentTables,
};
use cort::measure::CostModel;
use cort::rng::CounterRng;
use cort::tree_code::TreeProfile;
use proptest::prelude::*;

fn arb_profile(max_n: usize, max_k: usize) -> impl Strategy<Value = TreeProfile> {
    (1usize..=max_n)
        .prop_flat_map(move |n| (Just(n), 1..=n.min(max_k)))
        .prop_flat_map(|(n, k)| (Just(n), proptest::collection::vec(0..n, k - 1)))
        .prop_map(|(n, mut rest)| {
            rest.sort_unstable();
            let arrivals: Vec<usize> = std::iter::once(1).chain(rest.into_iter().map(|a| a + 1)).collect();
            TreeProfile::from_arrivals(n, &arrivals).unwrap()
        })
}

#[test]
fn range_sums_match_direct_products() {
    let n = 200;
    let mut rng = CounterRng::new(8);
    for (p, gamma) in [(0.03, 1.0), (0.1, 0.9992), (0.2, 0.9)] {
        let cm = CostModel::bsc(p, gamma, n).unwrap();
        let grid = uniform_grid(10);
        let t = MomentTables::new(&cm, &grid);
        for _ in 0..1000 {
            let g = (rng.next_u64() % 10) as usize;
            let a = 1 + (rng.next_u64() % n as u64) as usize;
            let b = 1 + (rng.next_u64() % n as u64) as usize;
            let (from, to) = (a.min(b), a.max(b));
            let th = theta_of(grid[g]);
            let d = |i: usize| gamma.powi(i as i32 - 1) * ((1.0 - p) / p).log2();
            let abar: f64 = (from..=to).map(|i| moment_abar(th, d(i))).product::<f64>().log2();
            let am: f64 = (from..=to).map(|i| moment_a(p, th, d(i))).product::<f64>().log2();
            assert!((t.range_log_abar(g, from, to) - abar).abs() < 1e-9);
            assert!((t.range_log_a(g, from, to) - am).abs() < 1e-9);
            assert_eq!(t.range_log_a(g, to + 1, to), 0.0);
        }
    }
}

#[test]
fn gallager_reference_grows_with_noise() {
    let grid = uniform_grid(10);
    let vals: Vec<f64> = [0.01, 0.02, 0.03, 0.05, 0.08, 0.11]
        .iter()
        .map(|&p| gallager_reference_bsc(128, 64, p, &grid).value)
        .collect();
    assert!(vals.windows(2).all(|w| w[0] <= w[1]), "{vals:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn divergence_distributions_are_normalized(profile in arb_profile(64, 60)) {
        let tau = tau_distribution(&profile);
        let total: f64 = tau.probs.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        let wsum: f64 = tau.weights.iter().sum();
        let full = (profile.k() as f64).exp2();
        prop_assert!((wsum - full).abs() <= 1e-12 * full);
        for h in 1..profile.num_stages() {
            let d = tau_h_distribution(&profile, h).unwrap();
            prop_assert_eq!(d.len(), h + 1);
            prop_assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        prop_assert!(tau_h_distribution(&profile, 0).is_err());
        prop_assert!(tau_h_distribution(&profile, profile.num_stages()).is_err());
    }

    #[test]
    fn agrees_with_direct_evaluation(profile in arb_profile(12, 8), p in 0.01f64..0.3, gamma in 0.8f64..=1.0, log_l in 3u32..20) {
        let limit = (1u64 << log_l).max(1 << profile.fanout_bits(0));
        let grid = uniform_grid(6);
        let t = MomentTables::new(&CostModel::bsc(p, gamma, profile.n()).unwrap(), &grid);
        let (cle, cfe) = common::naive_bounds(profile.s(), p, gamma, limit as f64, &grid);
        let got = d_e_g(&profile, limit, &t);
        prop_assert!((got.d_cle_g - cle).abs() <= 1e-9 * cle, "{} vs {}", got.d_cle_g, cle);
        prop_assert!((got.d_cfe_g - cfe).abs() <= 1e-9 * cfe.max(1e-300), "{} vs {}", got.d_cfe_g, cfe);
        prop_assert_eq!(got.d_e_g, got.d_cle_g + got.d_cfe_g);
    }

    #[test]
    fn limit_part_is_inverse_in_budget(profile in arb_profile(32, 16), p in 0.01f64..0.3, log_l in 16u32..40) {
        let t = MomentTables::with_default_grid(&CostModel::bsc(p, 1.0, profile.n()).unwrap());
        let a = d_cle_g_curve(&profile, 1 << log_l, &t);
        let b = d_cle_g_curve(&profile, 1 << (log_l + 1), &t);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - 2.0 * y).abs() <= 1e-12 * x);
        }
        prop_assert!(d_cle_g(&profile, 1 << (log_l + 1), &t).value <= d_cle_g(&profile, 1 << log_l, &t).value);
    }

    #[test]
    fn free_part_at_zero_tilt_counts_stages(profile in arb_profile(32, 16), p in 0.01f64..0.3) {
        // At ρ = 0 every stage contributes exactly one.
        let t = MomentTables::new(&CostModel::bsc(p, 1.0, profile.n()).unwrap(), &[0.0]);
        prop_assert_eq!(d_cfe_g(&profile, &t).value, profile.num_stages() as f64);
    }
}
