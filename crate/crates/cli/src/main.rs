//! `hetnet-bounds`: interference and capacity bounds for K-tier networks from
//! JSON scenario files, written as CSV.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use hetnet_core::capacity::{AnalysisSettings, CapacityAnalysis, CapacityBand, Policy};
use hetnet_core::gaussian::{cdf_band, gaussian_summary, GaussianSummary};
use hetnet_core::montecarlo::{simulate_awi, simulate_barss, simulate_link, SimulationPlan};
use hetnet_core::spatial::NetworkScenario;
use hetnet_core::Error;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::config::{ConfigError, ScenarioFile};

const SCHEMA: u32 = 1;
const DEFAULT_REALIZATIONS: u64 = 100_000;
const DEFAULT_SEED: u64 = 1;
const HISTOGRAM_BINS: usize = 64;

#[derive(Parser)]
#[command(name = "hetnet-bounds", version, about = "Gaussian-approximation bounds for K-tier cellular networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bounds on the standardized interference CDF, one file per sweep value.
    Cdf(RunArgs),
    /// Outage capacity band, plus outage probability bounds on the rate grid.
    Outage(RunArgs),
    /// Ergodic capacity band.
    Ergodic(RunArgs),
    /// Area spectral efficiency band.
    Ase(RunArgs),
    /// Monte-Carlo statistics of BARSS drops.
    Mc(RunArgs),
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Scenario file (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Add Monte-Carlo columns.
    #[arg(long)]
    mc: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    realizations: Option<u64>,
    /// Output CSV; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Job {
    file: ScenarioFile,
    hash: String,
    mc: Option<(u64, u64)>,
    out: Option<PathBuf>,
}

impl Job {
    fn load(args: &RunArgs, force_mc: bool) -> Result<Self> {
        let text = fs::read_to_string(&args.config)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", args.config.display())))?;
        let file = ScenarioFile::parse(&text)?;
        let hash = Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect();
        let mc = (args.mc || force_mc || args.seed.is_some()).then(|| {
            (
                args.seed.or(file.mc.seed).unwrap_or(DEFAULT_SEED),
                args.realizations.or(file.mc.realizations).unwrap_or(DEFAULT_REALIZATIONS),
            )
        });
        Ok(Self {
            file,
            hash,
            mc,
            out: args.out.clone(),
        })
    }

    fn header(&self) -> String {
        let seed = self.mc.map_or("none".to_string(), |m| m.0.to_string());
        format!(
            "# hetnet-bounds {} schema={SCHEMA} seed={seed} config_sha256={}\n",
            env!("CARGO_PKG_VERSION"),
            self.hash
        )
    }

    fn settings(&self) -> AnalysisSettings {
        AnalysisSettings::default().with_xi_scale(self.file.xi_scale)
    }

    fn plan(&self, scenario: NetworkScenario) -> SimulationPlan {
        let (seed, n) = self.mc.unwrap_or((DEFAULT_SEED, DEFAULT_REALIZATIONS));
        let f = &self.file;
        let mut plan = SimulationPlan::new(scenario, n, seed)
            .with_x_grid(f.x_grid.values())
            .with_tau_grid(f.tau_grid.values());
        if let Some(w) = &f.mc.windows {
            plan = plan.with_windows(w.clone());
        }
        if let Some(m) = f.mc.far_field {
            plan = plan.with_far_field(m);
        }
        if let Some(c) = f.mc.confidence {
            plan = plan.with_confidence(c);
        }
        plan
    }

    /// Runs `point` for every sweep value in parallel, keeping sweep order.
    fn sweep<T: Send>(&self, point: impl Fn(f64) -> Result<T> + Sync) -> Result<Vec<(f64, T)>> {
        let kappas = self.file.kappas();
        let results: Vec<Result<T>> = kappas.par_iter().map(|&k| point(k)).collect();
        kappas
            .into_iter()
            .zip(results)
            .map(|(k, r)| r.map(|v| (k, v)).with_context(|| format!("kappa = {k}")))
            .collect()
    }
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

fn write_csv(path: Option<&Path>, header: &str, rows: &[Vec<String>]) -> Result<()> {
    let mut buf = header.as_bytes().to_vec();
    {
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(&mut buf);
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
    }
    match path {
        Some(p) => fs::write(p, &buf).with_context(|| format!("cannot write {}", p.display()))?,
        None => io::stdout().lock().write_all(&buf)?,
    }
    Ok(())
}

/// `dir/stem_suffix.ext` next to `path`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(e) => format!("{stem}_{suffix}.{}", e.to_string_lossy()),
        None => format!("{stem}_{suffix}"),
    };
    path.with_file_name(name)
}

/// One standard error from a ±3σ order-statistic interval.
fn order_statistic_error(q: f64, lo: f64, hi: f64) -> f64 {
    (q - lo).max(hi - q) / 3.0
}

fn band_row(kappa: f64, b: &CapacityBand) -> Vec<String> {
    vec![fmt(kappa), fmt(b.lower), fmt(b.heuristic), fmt(b.upper)]
}

fn band_columns(mc: bool) -> Vec<String> {
    let mut c: Vec<String> = ["kappa", "lower", "heuristic", "upper"].map(String::from).to_vec();
    if mc {
        c.extend(["mc_estimate", "mc_err"].map(String::from));
    }
    c
}

fn cmd_cdf(job: &Job) -> Result<()> {
    let x = job.file.x_grid.values();
    if x.is_empty() {
        return Err(ConfigError("cdf needs an x_grid".into()).into());
    }
    let excl = job.file.exclusion();
    let blocks = job.sweep(|kappa| {
        let s = job.file.at_kappa(kappa);
        let mut summary: GaussianSummary = gaussian_summary(&s, &excl)?;
        summary.xi *= job.file.xi_scale;
        let mc = match job.mc {
            Some(_) => Some(simulate_awi(&job.plan(s), &excl)?),
            None => None,
        };
        let mut rows = vec![{
            let mut c: Vec<String> = ["x", "lower", "upper", "xi"].map(String::from).to_vec();
            if mc.is_some() {
                c.extend(["empirical", "dkw_slack"].map(String::from));
            }
            c
        }];
        for (i, &xi) in x.iter().enumerate() {
            let (lo, hi) = cdf_band(xi, &summary);
            let mut r = vec![fmt(xi), fmt(lo), fmt(hi), fmt(summary.xi)];
            if let Some(m) = &mc {
                r.extend([fmt(m.cdf[i]), fmt(m.slack)]);
            }
            rows.push(r);
        }
        Ok(rows)
    })?;
    for (kappa, rows) in blocks {
        match &job.out {
            Some(p) => write_csv(Some(&sibling(p, &format!("kappa_{kappa}"))), &job.header(), &rows)?,
            None => write_csv(None, &format!("{}# kappa={kappa}\n", job.header()), &rows)?,
        }
    }
    Ok(())
}

fn cmd_outage(job: &Job) -> Result<()> {
    let gamma = job.file.gamma()?;
    let policy = job.file.policy();
    if job.mc.is_some() && policy != Policy::Barss {
        return Err(ConfigError("Monte-Carlo outage capacity needs the BARSS policy".into()).into());
    }
    let taus = job.file.tau_grid.values();
    let points = job.sweep(|kappa| {
        let s = job.file.at_kappa(kappa);
        let analysis = CapacityAnalysis::new(&s, &policy, job.settings())?;
        let band = analysis.outage_capacity_band(gamma)?;
        let probs = taus
            .iter()
            .map(|&t| analysis.outage_bounds(t))
            .collect::<hetnet_core::Result<Vec<_>>>()?;
        let mc = match job.mc {
            Some(_) => Some(simulate_barss(&job.plan(s).with_gamma(gamma), None, HISTOGRAM_BINS)?),
            None => None,
        };
        Ok((band, probs, mc))
    })?;
    let mut rows = vec![band_columns(job.mc.is_some())];
    let mut tau_rows = vec![{
        let mut c: Vec<String> = ["kappa", "tau", "lower", "upper"].map(String::from).to_vec();
        if job.mc.is_some() {
            c.extend(["mc_estimate", "mc_err"].map(String::from));
        }
        c
    }];
    for (kappa, (band, probs, mc)) in &points {
        let mut r = band_row(*kappa, band);
        if let Some(m) = mc {
            let (q, lo, hi) = m.outage_capacity.expect("gamma set on the plan");
            r.extend([fmt(q), fmt(order_statistic_error(q, lo, hi))]);
        }
        rows.push(r);
        for (i, (t, p)) in taus.iter().zip(probs).enumerate() {
            let mut r = vec![fmt(*kappa), fmt(*t), fmt(p.0), fmt(p.1)];
            if let Some(m) = mc {
                r.extend([fmt(m.rates.outage[i]), fmt(m.rates.outage_std_error[i])]);
            }
            tau_rows.push(r);
        }
    }
    write_csv(job.out.as_deref(), &job.header(), &rows)?;
    if !taus.is_empty() {
        match &job.out {
            Some(p) => write_csv(Some(&sibling(p, "tau")), &job.header(), &tau_rows)?,
            None => write_csv(None, "# outage probability\n", &tau_rows)?,
        }
    }
    Ok(())
}

fn cmd_ergodic(job: &Job) -> Result<()> {
    let policy = job.file.policy();
    let points = job.sweep(|kappa| {
        let s = job.file.at_kappa(kappa);
        let band = CapacityAnalysis::new(&s, &policy, job.settings())?.ergodic_capacity_band()?;
        let mc = match (job.mc, &policy) {
            (None, _) => None,
            (Some(_), Policy::Barss) => {
                let r = simulate_barss(&job.plan(s), None, HISTOGRAM_BINS)?.rates;
                Some((r.ergodic_mean, r.ergodic_std_error))
            }
            (Some(_), Policy::Generic { tier, distance, exclusion }) => {
                let r = simulate_link(&job.plan(s), *tier, *distance, exclusion)?;
                Some((r.ergodic_mean, r.ergodic_std_error))
            }
        };
        Ok((band, mc))
    })?;
    let mut rows = vec![band_columns(job.mc.is_some())];
    for (kappa, (band, mc)) in &points {
        let mut r = band_row(*kappa, band);
        if let Some((m, e)) = mc {
            r.extend([fmt(*m), fmt(*e)]);
        }
        rows.push(r);
    }
    write_csv(job.out.as_deref(), &job.header(), &rows)
}

fn cmd_ase(job: &Job) -> Result<()> {
    let gammas = job.file.gammas()?;
    if job.file.policy() != Policy::Barss {
        return Err(ConfigError("area spectral efficiency needs the BARSS policy".into()).into());
    }
    let points = job.sweep(|kappa| {
        let s = job.file.at_kappa(kappa);
        let band = CapacityAnalysis::barss(&s, job.settings())?.ase_band(&gammas)?;
        let mc = match job.mc {
            Some(_) => {
                let r = simulate_barss(&job.plan(s), Some(&gammas), HISTOGRAM_BINS)?;
                r.ase.zip(r.ase_interval)
            }
            None => None,
        };
        Ok((band, mc))
    })?;
    let mut rows = vec![band_columns(job.mc.is_some())];
    for (kappa, (band, mc)) in &points {
        let mut r = band_row(*kappa, band);
        if job.mc.is_some() {
            match mc {
                Some((q, (lo, hi))) => r.extend([fmt(*q), fmt(order_statistic_error(*q, *lo, *hi))]),
                None => r.extend([String::new(), String::new()]),
            }
        }
        rows.push(r);
    }
    write_csv(job.out.as_deref(), &job.header(), &rows)
}

fn cmd_mc(job: &Job) -> Result<()> {
    let gammas = job.file.gamma_vec.clone().or_else(|| job.file.gamma.map(|g| vec![g; job.file.scenario.num_tiers()]));
    let taus = job.file.tau_grid.values();
    let points = job.sweep(|kappa| {
        let mut plan = job.plan(job.file.at_kappa(kappa));
        if let Some(g) = job.file.gamma {
            plan = plan.with_gamma(g);
        }
        Ok(simulate_barss(&plan, gammas.as_deref(), HISTOGRAM_BINS)?)
    })?;
    let mut rows = vec![["kappa", "metric", "value", "std_error"].map(String::from).to_vec()];
    for (kappa, r) in &points {
        let n = r.association_counts.iter().sum::<u64>() as f64;
        let k = fmt(*kappa);
        for (i, p) in r.association.iter().enumerate() {
            rows.push(vec![k.clone(), format!("association_{i}"), fmt(*p), fmt((p * (1.0 - p) / n).sqrt())]);
        }
        for (i, t) in taus.iter().enumerate() {
            rows.push(vec![
                k.clone(),
                format!("outage_tau_{t}"),
                fmt(r.rates.outage[i]),
                fmt(r.rates.outage_std_error[i]),
            ]);
        }
        rows.push(vec![k.clone(), "ergodic".into(), fmt(r.rates.ergodic_mean), fmt(r.rates.ergodic_std_error)]);
        if let Some((q, lo, hi)) = r.outage_capacity {
            rows.push(vec![k.clone(), "outage_capacity".into(), fmt(q), fmt(order_statistic_error(q, lo, hi))]);
        }
        if let (Some(a), Some((lo, hi))) = (r.ase, r.ase_interval) {
            rows.push(vec![k.clone(), "ase".into(), fmt(a), fmt(order_statistic_error(a, lo, hi))]);
        }
    }
    write_csv(job.out.as_deref(), &job.header(), &rows)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ConfigError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<Error>() {
        Some(Error::InvalidConfig(_)) => 2,
        Some(Error::NonHomogeneousDensity { .. }) => 4,
        Some(e) if e.is_non_convergent() => 3,
        _ => 1,
    }
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("HETNET_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| ConfigError(format!("HETNET_THREADS must be a positive integer, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    match &cli.command {
        Command::Cdf(a) => cmd_cdf(&Job::load(a, false)?),
        Command::Outage(a) => cmd_outage(&Job::load(a, false)?),
        Command::Ergodic(a) => cmd_ergodic(&Job::load(a, false)?),
        Command::Ase(a) => cmd_ase(&Job::load(a, false)?),
        Command::Mc(a) => cmd_mc(&Job::load(a, true)?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hetnet-bounds: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
