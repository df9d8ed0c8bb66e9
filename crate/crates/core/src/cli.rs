//! Reproducible experiment commands.
//!
//! Each `cmd_*` function is a pure computation over its arguments. [`persist`]
//! writes a [`RunRecord`] under `<results>/<command>/<timestamp>-<hash>/`, where
//! `<results>` comes from `--results-dir`, then `CORT_RESULTS_DIR`, then `results`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::bounds::{
    d_cle_m_exact, d_e_g, expected_checks_bound, gallager_reference_bsc, rcu_exact_bsc, uniform_grid, BoundReport,
    GridMin, MomentTables, CSV_HEADER,
};
use crate::error::{param, Error, Result};
use crate::measure::CostModel;
use crate::montecarlo::{simulate, SimStats, TrialConfig, SIM_CSV_HEADER};
use crate::sbp::{sbp_optimize, SbpTrace};
use crate::tree_code::TreeProfile;

/// Environment variable naming the default results directory.
pub const RESULTS_ENV: &str = "CORT_RESULTS_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "cort",
    version,
    about = "Random tree codes: bounds, profile optimization, simulation"
)]
pub struct Cli {
    /// Worker threads (defaults to available cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Results directory root.
    #[arg(long, global = true)]
    pub results_dir: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the bounds for one profile.
    Bound(BoundArgs),
    /// Optimize a profile by successive bit placement.
    Sbp(SbpArgs),
    /// Monte Carlo simulation of the sequential decoder.
    Simulate(SimulateArgs),
    /// Regenerate a reference table or an explicit sweep as CSV.
    Tables(TablesArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BoundArgs {
    /// Profile JSON file, or `pure` for `s(1) = k`.
    #[arg(long)]
    pub profile: String,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long)]
    pub limit: f64,
    #[arg(long, default_value_t = crate::bounds::DEFAULT_GRID_POINTS)]
    pub grid_points: usize,
    /// Extra copy of the report JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SbpArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long)]
    pub limit: f64,
    #[arg(long, default_value_t = crate::bounds::DEFAULT_GRID_POINTS)]
    pub grid_points: usize,
    #[arg(long)]
    pub out_profile: Option<PathBuf>,
    #[arg(long)]
    pub out_trace: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    /// Profile JSON file, or `pure` together with `--n` and `--k`.
    #[arg(long)]
    pub profile: String,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long)]
    pub limit: f64,
    #[arg(long)]
    pub trials: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Sample a fresh code for every trial.
    #[arg(long)]
    pub resample_code: bool,
    /// CSV file to append the result row to.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TablesArgs {
    /// Reference table number (1-4).
    #[arg(long = "paper-table", alias = "table", value_parser = clap::value_parser!(u8).range(1..=4))]
    pub table: Option<u8>,
    #[arg(long, default_value_t = 128)]
    pub n: usize,
    #[arg(long, default_value_t = 64)]
    pub k: usize,
    /// Crossover probabilities for an explicit sweep.
    #[arg(long, value_delimiter = ',')]
    pub p: Vec<f64>,
    /// Discount factors for an explicit sweep.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub gamma: Vec<f64>,
    /// Budgets for an explicit sweep.
    #[arg(long, value_delimiter = ',')]
    pub limits: Vec<f64>,
    #[arg(long, default_value_t = crate::bounds::DEFAULT_GRID_POINTS)]
    pub grid_points: usize,
    /// CSV output path (also written into the run directory).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn limit_from(x: f64) -> Result<u64> {
    if x.is_nan() || x < 1.0 || x > u64::MAX as f64 {
        return Err(param("limit", format!("budget must be a positive integer, got {x}")));
    }
    if x.fract() != 0.0 {
        return Err(param("limit", format!("budget must be an integer, got {x}")));
    }
    Ok(x as u64)
}

fn grid_from(points: usize) -> Result<Vec<f64>> {
    if points < 2 {
        return Err(param("grid_points", "at least two grid points are required"));
    }
    Ok(uniform_grid(points))
}

/// Loads `pure` (with `n`, `k`) or a profile JSON file, checking any given `n`, `k`.
pub fn load_profile(source: &str, n: Option<usize>, k: Option<usize>) -> Result<TreeProfile> {
    if source == "pure" {
        let (n, k) = match (n, k) {
            (Some(n), Some(k)) => (n, k),
            _ => return Err(param("profile", "`pure` requires --n and --k")),
        };
        return TreeProfile::pure(n, k);
    }
    let text =
        fs::read_to_string(source).map_err(|e| Error::Config(format!("cannot read profile file `{source}`: {e}")))?;
    let p = TreeProfile::from_json(&text)?;
    if n.is_some_and(|n| n != p.n()) || k.is_some_and(|k| k != p.k()) {
        return Err(param("profile", "file dimensions differ from --n/--k"));
    }
    Ok(p)
}

/// Bound report plus classical baselines for the same `(n, k, p)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundOutput {
    pub report: BoundReport,
    /// Random-coding union bound for the uniform random code.
    pub rcu: Option<f64>,
    /// Gallager's bound for the uniform random code on the same grid.
    pub gallager: Option<GridMin>,
    /// Exact limit part without Chernoff relaxation (undiscounted measure only).
    pub d_cle_m_exact: Option<f64>,
    /// `d_cle_m_exact · L`.
    pub expected_checks_bound: Option<f64>,
    /// `d_cle_g · L`, a looser proxy available for every discount.
    pub expected_checks_proxy: f64,
}

pub fn cmd_bound(args: &BoundArgs) -> Result<BoundOutput> {
    let profile = load_profile(&args.profile, args.n, args.k)?;
    let limit = limit_from(args.limit)?;
    let grid = grid_from(args.grid_points)?;
    let cm = CostModel::bsc(args.p, args.gamma, profile.n())?;
    let tables = MomentTables::new(&cm, &grid);
    let report = d_e_g(&profile, limit, &tables);
    let exact = d_cle_m_exact(&profile, &cm, limit).ok();
    let rcu = rcu_exact_bsc(profile.n(), profile.k(), args.p).ok();
    Ok(BoundOutput {
        rcu,
        gallager: Some(gallager_reference_bsc(profile.n(), profile.k(), args.p, &grid)),
        d_cle_m_exact: exact,
        expected_checks_bound: exact.map(|d| expected_checks_bound(d, limit)),
        expected_checks_proxy: report.d_cle_g * limit as f64,
        report,
    })
}

pub fn cmd_sbp(args: &SbpArgs) -> Result<SbpTrace> {
    let limit = limit_from(args.limit)?;
    let grid = grid_from(args.grid_points)?;
    let cm = CostModel::bsc(args.p, args.gamma, args.n)?;
    sbp_optimize(args.n, args.k, limit, &MomentTables::new(&cm, &grid))
}

/// Builds the trial configuration described by `args`.
pub fn simulate_config(args: &SimulateArgs) -> Result<TrialConfig> {
    Ok(TrialConfig {
        profile: Arc::new(load_profile(&args.profile, args.n, args.k)?),
        p: args.p,
        gamma: args.gamma,
        limit: limit_from(args.limit)?,
        trials: args.trials,
        base_seed: args.seed,
        resample_code: args.resample_code,
    })
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<SimStats> {
    simulate(simulate_config(args)?)
}

/// One printed reference entry: `(D_E, D_CLE, D_CFE)`.
pub type ReferenceEntry = (f64, f64, f64);

/// A reference table for the `(128, 64)` code at budgets `1e9, 1e10, 1e11`.
#[derive(Debug, Clone, Copy)]
pub struct ReferenceTable {
    pub number: u8,
    pub p: f64,
    pub gamma: f64,
    pub entries: [ReferenceEntry; 3],
}

pub const REFERENCE_LIMITS: [u64; 3] = [1_000_000_000, 10_000_000_000, 100_000_000_000];

pub const REFERENCE_TABLES: [ReferenceTable; 4] = [
    ReferenceTable {
        number: 1,
        p: 0.03,
        gamma: 1.0,
        entries: [
            (3.6e-3, 1.7e-3, 2.0e-3),
            (1.9e-3, 0.4e-3, 1.5e-3),
            (1.3e-3, 0.8e-4, 1.2e-3),
        ],
    },
    ReferenceTable {
        number: 2,
        p: 0.03,
        gamma: 0.9992,
        entries: [
            (2.7e-3, 0.6e-3, 2.1e-3),
            (1.7e-3, 0.2e-3, 1.5e-5),
            (1.5e-3, 0.7e-4, 1.4e-3),
        ],
    },
    ReferenceTable {
        number: 3,
        p: 0.02,
        gamma: 1.0,
        entries: [
            (7.2e-5, 3.7e-5, 3.5e-5),
            (2.6e-5, 1.1e-5, 1.4e-5),
            (9.4e-6, 2.8e-6, 6.6e-6),
        ],
    },
    ReferenceTable {
        number: 4,
        p: 0.02,
        gamma: 0.9992,
        entries: [
            (4.6e-5, 2.2e-5, 2.4e-5),
            (1.7e-5, 0.6e-5, 1.1e-5),
            (7.5e-6, 1.8e-6, 5.7e-6),
        ],
    },
];

/// Relative slack for the additive check on two-digit printed values.
pub const ADDITIVE_TOLERANCE: f64 = 0.05;

/// Whether a printed triple satisfies `D_E ≈ D_CLE + D_CFE` up to rounding.
pub fn additive_consistent(e: &ReferenceEntry) -> bool {
    (e.0 - (e.1 + e.2)).abs() <= ADDITIVE_TOLERANCE * e.0
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub table: Option<u8>,
    pub report: BoundReport,
    pub reference: Option<ReferenceEntry>,
    /// `None` without a reference; otherwise whether the printed triple adds up.
    pub reference_additive: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TablesOutput {
    pub rows: Vec<TableRow>,
}

/// Header of [`TablesOutput::to_csv`].
pub fn tables_csv_header() -> String {
    format!("{CSV_HEADER},ref_d_e,ref_d_cle,ref_d_cfe,ref_additive")
}

impl TablesOutput {
    pub fn to_csv(&self) -> String {
        let mut s = tables_csv_header();
        s.push('\n');
        for r in &self.rows {
            let (a, b, c) = match r.reference {
                Some((a, b, c)) => (format!("{a:e}"), format!("{b:e}"), format!("{c:e}")),
                None => Default::default(),
            };
            let flag = r.reference_additive.map(|f| f.to_string()).unwrap_or_default();
            let _ = writeln!(s, "{},{a},{b},{c},{flag}", r.report.csv_row());
        }
        s
    }
}

/// Table, `p`, `γ`, `L` and reference entry of one row.
type TableJob<'a> = (Option<&'a ReferenceTable>, f64, f64, u64, Option<ReferenceEntry>);

/// Optimizes the profile at every `(p, γ, L)` and reports the final bounds.
pub fn cmd_tables(args: &TablesArgs) -> Result<TablesOutput> {
    let grid = grid_from(args.grid_points)?;
    let mut jobs: Vec<TableJob> = Vec::new();
    if let Some(t) = args.table {
        let tab = REFERENCE_TABLES
            .iter()
            .find(|x| x.number == t)
            .ok_or_else(|| param("paper-table", "table number must be 1-4"))?;
        if (args.n, args.k) != (128, 64) {
            return Err(param("paper-table", "reference tables are defined for n = 128, k = 64"));
        }
        for (l, e) in REFERENCE_LIMITS.iter().zip(tab.entries) {
            jobs.push((Some(tab), tab.p, tab.gamma, *l, Some(e)));
        }
    } else {
        if args.p.is_empty() || args.limits.is_empty() {
            return Err(param("p", "an explicit sweep needs --p and --limits"));
        }
        for &p in &args.p {
            for &g in &args.gamma {
                for &l in &args.limits {
                    jobs.push((None, p, g, limit_from(l)?, None));
                }
            }
        }
    }
    let mut rows = Vec::with_capacity(jobs.len());
    for (tab, p, gamma, limit, reference) in jobs {
        let cm = CostModel::bsc(p, gamma, args.n)?;
        let trace = sbp_optimize(args.n, args.k, limit, &MomentTables::new(&cm, &grid))?;
        rows.push(TableRow {
            table: tab.map(|t| t.number),
            report: trace.final_report,
            reference,
            reference_additive: reference.as_ref().map(additive_consistent),
        });
    }
    Ok(TablesOutput { rows })
}

/// 4 significant digits in scientific notation.
pub fn sci(x: f64) -> String {
    format!("{x:.3e}")
}

pub fn render_bound(o: &BoundOutput) -> String {
    let r = &o.report;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "profile     n={} k={} stages={}",
        r.n,
        r.k,
        r.profile.s.windows(2).filter(|w| w[0] != w[1]).count() + 1
    );
    let _ = writeln!(s, "channel     p={} gamma={} L={}", r.p, r.gamma, r.limit);
    let _ = writeln!(
        s,
        "D_CLE^(G)   {}   (varrho* = {:.4})",
        sci(r.d_cle_g_clipped()),
        r.varrho_star
    );
    let _ = writeln!(
        s,
        "D_CFE^(G)   {}   (rho* = {:.4})",
        sci(r.d_cfe_g_clipped()),
        r.rho_star
    );
    let _ = writeln!(s, "D_E^(G)     {}", sci(r.d_e_g_clipped()));
    if let Some(x) = o.d_cle_m_exact {
        let _ = writeln!(
            s,
            "D_CLE^(M)   {}   (E[N_c] <= {})",
            sci(x.min(1.0)),
            sci(o.expected_checks_bound.unwrap_or(f64::NAN))
        );
    }
    if let Some(x) = o.rcu {
        let _ = writeln!(s, "RCU         {}", sci(x));
    }
    if let Some(g) = &o.gallager {
        let _ = writeln!(s, "Gallager    {}   (rho* = {:.4})", sci(g.value.min(1.0)), g.param);
    }
    s
}

pub fn render_sbp(t: &SbpTrace) -> String {
    let mut s = String::from("step  j     D_E^(G)     D_CLE^(G)   D_CFE^(G)   varrho  rho\n");
    for st in &t.steps {
        let _ = writeln!(
            s,
            "{:<5} {:<5} {}  {}  {}  {:.3}   {:.3}",
            st.step,
            st.position,
            sci(st.d_e_g),
            sci(st.d_cle_g),
            sci(st.d_cfe_g),
            st.varrho_star,
            st.rho_star
        );
    }
    let _ = writeln!(s, "final s = {:?}", t.final_profile.s);
    s
}

pub fn render_sim(st: &SimStats) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "trials      {}", st.trials);
    let _ = writeln!(s, "FER         {} ± {}", sci(st.fer), sci(st.fer_ci));
    let _ = writeln!(s, "give-up     {} ± {}", sci(st.giveup_rate), sci(st.giveup_ci));
    let _ = writeln!(
        s,
        "undetected  {} ± {}",
        sci(st.undetected_error_rate),
        sci(st.undetected_ci)
    );
    let _ = writeln!(
        s,
        "mean N_c    {} ± {}",
        sci(st.mean_nodes_checked),
        sci(st.mean_nodes_ci)
    );
    let _ = writeln!(s, "max N_c     {}", st.max_nodes_checked);
    s
}

pub fn render_tables(t: &TablesOutput) -> String {
    let mut s = format!(
        "{:<6} {:<10} {:<10} {:<10} {:<10} {:<31} {}\n",
        "table", "L", "D_E", "D_CLE", "D_CFE", "reference (E / CLE / CFE)", "adds up"
    );
    for r in &t.rows {
        let reference = r
            .reference
            .map(|(a, b, c)| format!("{} / {} / {}", sci(a), sci(b), sci(c)))
            .unwrap_or_default();
        let _ = writeln!(
            s,
            "{:<6} {:<10e} {:<10} {:<10} {:<10} {:<31} {}",
            r.table.map(|x| x.to_string()).unwrap_or_default(),
            r.report.limit as f64,
            sci(r.report.d_e_g),
            sci(r.report.d_cle_g),
            sci(r.report.d_cfe_g),
            reference,
            r.reference_additive.map(|f| f.to_string()).unwrap_or_default()
        );
    }
    s
}

/// Persisted description of one command invocation.
#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub command: String,
    pub params: Value,
    pub timestamp: String,
    pub version: String,
    pub payload: Value,
    pub output_path: String,
}

/// Results root: explicit argument, then the environment, then `results`.
pub fn results_root(explicit: Option<&Path>) -> PathBuf {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(RESULTS_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("results"))
}

/// Writes `record.json` plus `files` (name, contents) into a fresh run directory.
pub fn persist<P: Serialize, T: Serialize>(
    root: &Path,
    command: &str,
    params: &P,
    payload: &T,
    files: &[(&str, String)],
) -> Result<PathBuf> {
    let params = serde_json::to_value(params)?;
    let payload = serde_json::to_value(payload)?;
    let digest = Sha256::digest(serde_json::to_vec(&params)?);
    let short = hex::encode(&digest[..4]);
    let now = chrono::Utc::now();
    let stamp = now.format("%Y%m%dT%H%M%SZ").to_string();
    let base = root.join(command);
    fs::create_dir_all(&base)?;
    let mut dir = base.join(format!("{stamp}-{short}"));
    let mut suffix = 1;
    while dir.exists() {
        dir = base.join(format!("{stamp}-{short}-{suffix}"));
        suffix += 1;
    }
    fs::create_dir(&dir)?;
    for (name, contents) in files {
        fs::write(dir.join(name), contents)?;
    }
    let record = RunRecord {
        command: command.to_string(),
        params,
        timestamp: now.to_rfc3339(),
        version: concat!(env!("CARGO_PKG_NAME"), "-", env!("CARGO_PKG_VERSION")).to_string(),
        payload,
        output_path: dir.display().to_string(),
    };
    fs::write(dir.join("record.json"), serde_json::to_string_pretty(&record)?)?;
    Ok(dir)
}

fn append_csv(path: &Path, header: &str, row: &str) -> Result<()> {
    use std::io::Write;
    let fresh = !path.exists();
    let mut f = fs::OpenOptions::new().create(true).append(true).open(path)?;
    if fresh {
        writeln!(f, "{header}")?;
    }
    writeln!(f, "{row}")?;
    Ok(())
}

fn pretty<T: Serialize>(x: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(x)?)
}

/// Runs a parsed command line: compute, persist, and return the human summary.
pub fn run(cli: &Cli) -> Result<String> {
    let root = results_root(cli.results_dir.as_deref());
    match &cli.command {
        Command::Bound(a) => {
            let out = cmd_bound(a)?;
            let csv = format!("{CSV_HEADER}\n{}\n", out.report.csv_row());
            let dir = persist(&root, "bound", a, &out, &[("bound.csv", csv)])?;
            if let Some(p) = &a.out {
                fs::write(p, pretty(&out)?)?;
            }
            Ok(format!("{}record: {}\n", render_bound(&out), dir.display()))
        }
        Command::Sbp(a) => {
            let trace = cmd_sbp(a)?;
            let profile_json = trace.profile().to_json();
            let trace_json = pretty(&trace)?;
            let dir = persist(
                &root,
                "sbp",
                a,
                &trace,
                &[
                    ("profile.json", profile_json.clone()),
                    ("trace.json", trace_json.clone()),
                ],
            )?;
            if let Some(p) = &a.out_profile {
                fs::write(p, profile_json)?;
            }
            if let Some(p) = &a.out_trace {
                fs::write(p, trace_json)?;
            }
            Ok(format!("{}record: {}\n", render_sbp(&trace), dir.display()))
        }
        Command::Simulate(a) => {
            let cfg = simulate_config(a)?;
            let stats = simulate(cfg.clone())?;
            let row = stats.csv_row(&cfg);
            let dir = persist(
                &root,
                "simulate",
                a,
                &stats,
                &[("stats.csv", format!("{SIM_CSV_HEADER}\n{row}\n"))],
            )?;
            if let Some(p) = &a.csv {
                append_csv(p, SIM_CSV_HEADER, &row)?;
            }
            Ok(format!("{}record: {}\n", render_sim(&stats), dir.display()))
        }
        Command::Tables(a) => {
            let out = cmd_tables(a)?;
            let csv = out.to_csv();
            let dir = persist(&root, "tables", a, &out, &[("table.csv", csv.clone())])?;
            if let Some(p) = &a.out {
                fs::write(p, &csv)?;
            }
            Ok(format!("{}record: {}\n", render_tables(&out), dir.display()))
        }
    }
}
