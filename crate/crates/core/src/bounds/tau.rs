//! Divergence-stage distributions of a uniformly random competitor.
//!
//! `τ_h` is the last branching time at which a uniform stage-`h` competitor
//! still agrees with the transmitted path; `τ` is the full-depth analogue.

use serde::Serialize;

use super::moments::log2_pow2_diff;
use crate::error::{param, Result};
use crate::tree_code::TreeProfile;

/// `log2 Pr(τ_h = b_{h'})` for `h' = 0..=h`; `h` may range over `1..=h_f`.
pub(crate) fn log_tau_h(profile: &TreeProfile, h: usize) -> Vec<f64> {
    (0..=h)
        .map(|hp| {
            let lo = profile.stage_level(hp) as f64;
            if hp == h {
                -lo
            } else {
                log2_pow2_diff(lo, profile.stage_level(hp + 1) as f64)
            }
        })
        .collect()
}

/// `Pr(τ_h = b_{h'})` for `h' = 0..=h`, defined for `1 <= h <= h_f - 1`.
pub fn tau_h_distribution(profile: &TreeProfile, h: usize) -> Result<Vec<f64>> {
    if h == 0 || h >= profile.num_stages() {
        return Err(param(
            "h",
            format!("stage must lie in 1..={}", profile.num_stages().saturating_sub(1)),
        ));
    }
    Ok(log_tau_h(profile, h).into_iter().map(f64::exp2).collect())
}

/// Full-depth divergence distribution with the weights `w_h = 2^k Pr(τ = b_h)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TauDistribution {
    /// `Pr(τ = b_h)` for `h = 0..=h_f`.
    pub probs: Vec<f64>,
    /// `w_h` for `h = 0..=h_f`.
    pub weights: Vec<f64>,
    /// `log2 w_h`, accurate even where `w_h` rounds.
    pub log_weights: Vec<f64>,
}

pub fn tau_distribution(profile: &TreeProfile) -> TauDistribution {
    // The last stage sits at level k, so this is the τ_{h_f} distribution.
    let hf = profile.num_stages();
    let k = profile.k() as f64;
    let level = |h: usize| profile.stage_level(h) as f64;
    let mut probs = Vec::with_capacity(hf + 1);
    let mut weights = Vec::with_capacity(hf + 1);
    for h in 0..=hf {
        if h == hf {
            probs.push((-k).exp2());
            weights.push(1.0);
        } else {
            probs.push((-level(h)).exp2() - (-level(h + 1)).exp2());
            weights.push((k - level(h)).exp2() - (k - level(h + 1)).exp2());
        }
    }
    TauDistribution {
        probs,
        weights,
        log_weights: log_tau_h(profile, hf).iter().map(|l| k + l).collect(),
    }
}
