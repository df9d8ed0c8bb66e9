//! Successive bit placement.
//!
//! Starting from `s(t) = 1`, each step adds one message bit at the position
//! `j` (so `s(t) += 1` for `t >= j`) that minimizes the bound, with the current
//! bit count standing in for `k`. Ties go to the smallest `j`.

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{d_e_g, BoundReport, MomentTables};
use crate::error::{param, Result};
use crate::tree_code::{ProfileDoc, TreeProfile};

/// Largest message length whose fanout weights stay finite in `f64`.
pub const MAX_BOUND_BITS: usize = 1000;

/// One insertion candidate.
#[derive(Debug, Clone)]
pub struct Candidate {
    /// 1-based insertion time.
    pub position: usize,
    pub profile: TreeProfile,
    pub report: BoundReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SbpStep {
    /// Bits placed before this step (`k'`); the step yields `k' + 1` bits.
    pub step: usize,
    pub position: usize,
    pub d_e_g: f64,
    pub d_cle_g: f64,
    pub d_cfe_g: f64,
    pub varrho_star: f64,
    pub rho_star: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SbpTrace {
    pub steps: Vec<SbpStep>,
    pub final_profile: ProfileDoc,
    pub final_report: BoundReport,
}

impl SbpTrace {
    pub fn profile(&self) -> TreeProfile {
        TreeProfile::from_doc(&self.final_profile).expect("optimizer emits valid profiles")
    }
}

/// Adds one bit arriving at time `j` (1-based).
pub fn insert_bit(current: &TreeProfile, j: usize) -> TreeProfile {
    assert!(j >= 1 && j <= current.n(), "insertion time outside 1..=n");
    let s: Vec<usize> = current
        .s()
        .iter()
        .enumerate()
        .map(|(i, &v)| if i + 1 >= j { v + 1 } else { v })
        .collect();
    TreeProfile::from_s(current.n(), current.k() + 1, &s).expect("insertion preserves validity")
}

/// Bound reports for every insertion position, in position order, with
/// duplicate s-vectors collapsed onto their smallest position.
pub fn candidate_sweep(current: &TreeProfile, limit: u64, tables: &MomentTables) -> Vec<Candidate> {
    let all: Vec<Candidate> = (1..=current.n())
        .into_par_iter()
        .map(|j| {
            let profile = insert_bit(current, j);
            let report = d_e_g(&profile, limit, tables);
            Candidate {
                position: j,
                profile,
                report,
            }
        })
        .collect();
    let mut out: Vec<Candidate> = Vec::with_capacity(all.len());
    for c in all {
        if !out.iter().any(|o| o.profile.s() == c.profile.s()) {
            out.push(c);
        }
    }
    out
}

/// Grows a profile to `k` bits by greedy placement.
pub fn sbp_optimize(n: usize, k: usize, limit: u64, tables: &MomentTables) -> Result<SbpTrace> {
    if n == 0 || k == 0 {
        return Err(param("k", "n and k must be positive"));
    }
    if k > MAX_BOUND_BITS {
        return Err(param(
            "k",
            format!("at most {MAX_BOUND_BITS} message bits are supported"),
        ));
    }
    if tables.n() != n {
        return Err(param("tables", "moment tables built for a different block length"));
    }
    if limit == 0 {
        return Err(param("limit", "budget must be positive"));
    }
    let mut current = TreeProfile::single_bit(n)?;
    let mut steps = Vec::with_capacity(k - 1);
    for step in 1..k {
        let candidates = candidate_sweep(&current, limit, tables);
        let mut best = &candidates[0];
        for c in &candidates[1..] {
            if c.report.d_e_g < best.report.d_e_g {
                best = c;
            }
        }
        steps.push(SbpStep {
            step,
            position: best.position,
            d_e_g: best.report.d_e_g,
            d_cle_g: best.report.d_cle_g,
            d_cfe_g: best.report.d_cfe_g,
            varrho_star: best.report.varrho_star,
            rho_star: best.report.rho_star,
        });
        current = best.profile.clone();
    }
    let final_report = d_e_g(&current, limit, tables);
    Ok(SbpTrace {
        steps,
        final_profile: current.to_doc(),
        final_report,
    })
}
