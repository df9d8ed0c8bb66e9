//! Ensemble simulation of the sequential decoder.
//!
//! Trial `i` uses seed `base_seed + i` (wrapping). The message, the code (when
//! resampled) and the noise come from separate streams derived from that seed,
//! so results do not depend on the number of worker threads.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::channel::BscChannel;
use crate::decoder::{exhaustive_min, DecodeOutcome, DecodeResult, Ssdgu, StackEntry, MAX_FANOUT_BITS};
use crate::error::{param, Error, Result};
use crate::measure::CostModel;
use crate::rng::{derive_key, CounterRng};
use crate::stats::{mean_half_width, wilson};
use crate::tree_code::{GeneratorMatrix, TreeProfile, MAX_MESSAGE_BITS};

const TAG_MESSAGE: u64 = 0x6D65_7373_6167_6500;
const TAG_CODE: u64 = 0x636F_6465_0000_0000;

/// Stack memory allowed across all workers before a run is refused.
pub const MEMORY_BUDGET_BYTES: u64 = 4 << 30;

#[derive(Debug, Clone, Serialize)]
pub struct TrialConfig {
    #[serde(serialize_with = "profile_doc")]
    pub profile: Arc<TreeProfile>,
    pub p: f64,
    pub gamma: f64,
    pub limit: u64,
    pub trials: u64,
    pub base_seed: u64,
    /// Fresh generator per trial (ensemble average) instead of one fixed code.
    pub resample_code: bool,
}

fn profile_doc<S: serde::Serializer>(p: &Arc<TreeProfile>, s: S) -> std::result::Result<S::Ok, S::Error> {
    serde::Serialize::serialize(&p.to_doc(), s)
}

impl TrialConfig {
    /// Rough peak stack memory of one decode, in bytes.
    pub fn stack_bytes_per_decode(&self) -> u64 {
        let widest = (0..self.profile.num_stages())
            .map(|h| self.profile.fanout_bits(h))
            .max()
            .unwrap_or(0);
        let entries = self.limit.saturating_add(1u64 << widest.min(63));
        entries.saturating_mul(std::mem::size_of::<StackEntry>() as u64)
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(param("trials", "at least one trial is required"));
        }
        if self.profile.k() > MAX_MESSAGE_BITS {
            return Err(param("k", format!("simulation supports k <= {MAX_MESSAGE_BITS}")));
        }
        let widest = (0..self.profile.num_stages())
            .map(|h| self.profile.fanout_bits(h))
            .max()
            .unwrap_or(0);
        if widest > MAX_FANOUT_BITS {
            return Err(Error::Config(format!(
                "a stage fanout of 2^{widest} cannot be enumerated (maximum 2^{MAX_FANOUT_BITS})"
            )));
        }
        let workers = rayon::current_num_threads() as u64;
        let need = self.stack_bytes_per_decode().saturating_mul(workers);
        if need > MEMORY_BUDGET_BYTES {
            return Err(Error::Config(format!(
                "decoding needs about {:.1} GiB of stack memory across {workers} workers \
                 (budget {:.1} GiB); lower --limit or --threads",
                need as f64 / (1u64 << 30) as f64,
                MEMORY_BUDGET_BYTES as f64 / (1u64 << 30) as f64
            )));
        }
        Ok(())
    }
}

/// Everything about one simulated frame.
#[derive(Debug, Clone)]
pub struct TrialRecord {
    pub message: u64,
    pub code: GeneratorMatrix,
    pub received: Vec<u8>,
    pub outcome: DecodeOutcome,
}

impl TrialRecord {
    pub fn is_undetected_error(&self) -> bool {
        matches!(self.outcome.result, DecodeResult::Message(m) if m != self.message)
    }
}

/// Prepared simulation: validated config plus shared objects.
#[derive(Debug, Clone)]
pub struct Simulator {
    config: TrialConfig,
    channel: BscChannel,
    cost: CostModel,
    fixed_code: Option<GeneratorMatrix>,
}

impl Simulator {
    pub fn new(config: TrialConfig) -> Result<Self> {
        config.validate()?;
        let channel = BscChannel::new(config.p)?;
        let cost = CostModel::new(channel, config.gamma, config.profile.n())?;
        // Fails early on a budget below the root fanout.
        let fixed = GeneratorMatrix::sample(config.profile.clone(), config.base_seed)?;
        Ssdgu::new(&fixed, &cost, config.limit)?;
        Ok(Self {
            fixed_code: (!config.resample_code).then_some(fixed),
            config,
            channel,
            cost,
        })
    }

    pub fn config(&self) -> &TrialConfig {
        &self.config
    }

    pub fn cost_model(&self) -> &CostModel {
        &self.cost
    }

    /// Runs trial `index` in isolation.
    pub fn trial(&self, index: u64) -> TrialRecord {
        let seed = self.config.base_seed.wrapping_add(index);
        let k = self.config.profile.k();
        let message = CounterRng::new(derive_key(seed, TAG_MESSAGE)).bits(k);
        let code = match &self.fixed_code {
            Some(g) => g.clone(),
            None => GeneratorMatrix::sample(self.config.profile.clone(), derive_key(seed, TAG_CODE))
                .expect("validated profile"),
        };
        let received = self.channel.transmit(&code.codeword(message), seed);
        let outcome = Ssdgu::new(&code, &self.cost, self.config.limit)
            .and_then(|d| d.decode(&received))
            .expect("validated configuration");
        TrialRecord {
            message,
            code,
            received,
            outcome,
        }
    }

    pub fn run(&self) -> SimStats {
        let tally = (0..self.config.trials)
            .into_par_iter()
            .map(|i| Tally::of(&self.trial(i)))
            .reduce(Tally::default, Tally::merge);
        tally.stats()
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    trials: u64,
    giveups: u64,
    undetected: u64,
    nc_sum: u128,
    nc_sq: u128,
    nc_max: u64,
    stack_max: usize,
}

impl Tally {
    fn of(r: &TrialRecord) -> Self {
        let nc = r.outcome.nodes_checked;
        Self {
            trials: 1,
            giveups: r.outcome.is_give_up() as u64,
            undetected: r.is_undetected_error() as u64,
            nc_sum: nc as u128,
            nc_sq: (nc as u128) * (nc as u128),
            nc_max: nc,
            stack_max: r.outcome.max_stack_size,
        }
    }

    fn merge(a: Self, b: Self) -> Self {
        Self {
            trials: a.trials + b.trials,
            giveups: a.giveups + b.giveups,
            undetected: a.undetected + b.undetected,
            nc_sum: a.nc_sum + b.nc_sum,
            nc_sq: a.nc_sq + b.nc_sq,
            nc_max: a.nc_max.max(b.nc_max),
            stack_max: a.stack_max.max(b.stack_max),
        }
    }

    fn stats(&self) -> SimStats {
        let n = self.trials as f64;
        let errors = self.giveups + self.undetected;
        SimStats {
            trials: self.trials,
            frame_errors: errors,
            giveups: self.giveups,
            undetected: self.undetected,
            fer: errors as f64 / n,
            fer_ci: wilson(errors, self.trials).1,
            giveup_rate: self.giveups as f64 / n,
            giveup_ci: wilson(self.giveups, self.trials).1,
            undetected_error_rate: self.undetected as f64 / n,
            undetected_ci: wilson(self.undetected, self.trials).1,
            mean_nodes_checked: self.nc_sum as f64 / n,
            mean_nodes_ci: mean_half_width(self.nc_sum, self.nc_sq, self.trials),
            max_nodes_checked: self.nc_max,
            max_stack_size: self.stack_max,
        }
    }
}

/// Outcome counts with 95% half-widths (Wilson for rates, normal for the mean).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimStats {
    pub trials: u64,
    pub frame_errors: u64,
    pub giveups: u64,
    pub undetected: u64,
    pub fer: f64,
    pub fer_ci: f64,
    pub giveup_rate: f64,
    pub giveup_ci: f64,
    pub undetected_error_rate: f64,
    pub undetected_ci: f64,
    pub mean_nodes_checked: f64,
    pub mean_nodes_ci: f64,
    pub max_nodes_checked: u64,
    pub max_stack_size: usize,
}

/// CSV columns of [`SimStats::csv_row`].
pub const SIM_CSV_HEADER: &str =
    "n,k,p,gamma,L,trials,seed,resample_code,fer,fer_ci,giveup_rate,giveup_ci,undetected_rate,undetected_ci,mean_nc,mean_nc_ci,max_nc";

impl SimStats {
    pub fn csv_row(&self, cfg: &TrialConfig) -> String {
        format!(
            "{},{},{:e},{:e},{},{},{},{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{}",
            cfg.profile.n(),
            cfg.profile.k(),
            cfg.p,
            cfg.gamma,
            cfg.limit,
            cfg.trials,
            cfg.base_seed,
            cfg.resample_code,
            self.fer,
            self.fer_ci,
            self.giveup_rate,
            self.giveup_ci,
            self.undetected_error_rate,
            self.undetected_ci,
            self.mean_nodes_checked,
            self.mean_nodes_ci,
            self.max_nodes_checked
        )
    }
}

/// Runs every trial of `config` in parallel.
pub fn simulate(config: TrialConfig) -> Result<SimStats> {
    Ok(Simulator::new(config)?.run())
}

/// Exhaustive minimum-cost message; ties go to the lexicographically smallest message.
pub fn ml_oracle(g: &GeneratorMatrix, y: &[u8], cm: &CostModel) -> Result<(u64, f64)> {
    exhaustive_min(g, y, cm)
}

/// Give-up rate and its Wilson half-width.
pub fn estimate_cle(config: TrialConfig) -> Result<(f64, f64)> {
    let s = simulate(config)?;
    Ok((s.giveup_rate, s.giveup_ci))
}
