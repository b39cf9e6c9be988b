//! Acceptance suite. Every test writes one `criterion N: PASS|FAIL` line to
//! stderr, outside the harness capture, and then asserts its verdict.

use std::io::Write;
use std::path::PathBuf;
use std::process::Command;

use hetnet_core::association::{association_probability_general, association_probability_segmented, Association};
use hetnet_core::capacity::{AnalysisSettings, CapacityAnalysis};
use hetnet_core::gaussian::{
    berry_esseen_crossover, cdf_band, gaussian_summary, xi_coefficient, xi_lower_bound, xi_upper_bound,
    ExclusionProfile,
};
use hetnet_core::montecarlo::{dkw_slack, simulate_association, simulate_awi, simulate_barss, SimulationPlan};
use hetnet_core::numerics::{integrate_semi_infinite_with_breaks, QuadratureSpec};
use hetnet_core::propagation::{FadingModel, PathLossModel};
use hetnet_core::spatial::{NetworkScenario, TierConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MC_DROPS: u64 = 100_000;

fn report(n: u32, name: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let mut err = std::io::stderr().lock();
    writeln!(err, "criterion {n} [{name}]: {verdict} {detail}").unwrap();
}

fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

/// Scenario and sweep values of a shipped config.
fn load(name: &str) -> (NetworkScenario, Vec<f64>) {
    let text = std::fs::read_to_string(config_path(name)).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let scenario: NetworkScenario = serde_json::from_value(v["scenario"].clone()).unwrap();
    let kappas = v["sweep"]["values"]
        .as_array()
        .map(|a| a.iter().map(|x| x.as_f64().unwrap()).collect())
        .unwrap_or_else(|| vec![scenario.kappa]);
    (scenario, kappas)
}

fn grid(from: f64, to: f64, points: usize) -> Vec<f64> {
    (0..points).map(|i| from + (to - from) * i as f64 / (points - 1) as f64).collect()
}

/// Wilson score interval for a binomial proportion.
fn wilson(p: f64, n: f64, z: f64) -> (f64, f64) {
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    (centre - half, centre + half)
}

#[test]
fn criterion_01_crossover() {
    let x = berry_esseen_crossover();
    let pass = (x - 4.0359).abs() <= 1e-3;
    report(1, "crossover constant", pass, &format!("|x| = {x:.6}"));
    assert!(pass);
}

#[test]
fn criterion_02_xi_scale_law() {
    let (s, _) = load("fig1_powerlaw_alpha3.json");
    let none = ExclusionProfile::none(s.num_tiers());
    let a = xi_coefficient(&s.clone().with_kappa(10.0), &none).unwrap();
    let b = xi_coefficient(&s.clone().with_kappa(40.0), &none).unwrap();
    let ratio = b / a;
    let pass = (ratio - 0.5).abs() <= 1e-9;
    report(2, "xi scale law", pass, &format!("ratio = {ratio:.15}"));
    assert!(pass);
}

fn random_scenario(rng: &mut ChaCha8Rng) -> NetworkScenario {
    let k = rng.random_range(1..=4);
    let tiers = (0..k)
        .map(|_| {
            let pl = if rng.random_bool(0.5) {
                PathLossModel::BoundedPowerLaw { alpha: rng.random_range(2.1..5.0) }
            } else {
                PathLossModel::StretchedExponential {
                    alpha: rng.random_range(0.2..3.0),
                    beta: rng.random_range(0.3..1.0),
                }
            };
            let f = match rng.random_range(0..3) {
                0 => FadingModel::Rayleigh,
                1 => FadingModel::Nakagami { m: rng.random_range(0.5..10.0) },
                _ => FadingModel::Deterministic { h: rng.random_range(0.1..4.0) },
            };
            TierConfig::new(rng.random_range(0.05..50.0), rng.random_range(0.01..10.0), pl, f)
        })
        .collect();
    NetworkScenario::new(tiers).with_kappa(rng.random_range(0.1..100.0))
}

#[test]
fn criterion_03_sandwich() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut violations = 0;
    for _ in 0..100 {
        let s = random_scenario(&mut rng);
        let xi = xi_coefficient(&s, &ExclusionProfile::none(s.num_tiers())).unwrap();
        let lo = xi_lower_bound(&s).unwrap();
        let hi = xi_upper_bound(&s).unwrap().bound;
        if !(lo <= xi * (1.0 + 1e-12) && xi <= hi * (1.0 + 1e-12)) {
            violations += 1;
        }
    }
    let mut worst = 0.0f64;
    for (alpha, h) in [(2.5, 1.0), (3.0, 0.3), (4.0, 2.0)] {
        let s = NetworkScenario::new(vec![TierConfig::new(
            2.0,
            0.7,
            PathLossModel::BoundedPowerLaw { alpha },
            FadingModel::Deterministic { h },
        )]);
        let xi = xi_coefficient(&s, &ExclusionProfile::none(1)).unwrap();
        worst = worst.max((xi_lower_bound(&s).unwrap() - xi).abs() / xi);
    }
    let pass = violations == 0 && worst <= 1e-10;
    report(
        3,
        "xi sandwich",
        pass,
        &format!("violations = {violations}/100, single-tier deterministic gap = {worst:.2e}"),
    );
    assert!(pass);
}

#[test]
fn criterion_04_05_containment_and_campbell() {
    let configs = [
        "fig1_powerlaw_alpha3.json",
        "fig1_stretched_exp.json",
        "fig2_guard_zone_5_powerlaw_alpha3.json",
        "fig2_guard_zone_5_stretched_exp.json",
        "fig2_annulus_2_20_powerlaw_alpha3.json",
        "fig2_annulus_2_20_stretched_exp.json",
        "fig2_annulus_10_50_powerlaw_alpha3.json",
        "fig2_annulus_10_50_stretched_exp.json",
    ];
    let x = grid(-5.0, 5.0, 201);
    let eps = dkw_slack(MC_DROPS, 0.99);
    let mut contained = true;
    let mut details = Vec::new();
    let mut campbell = None;
    for name in configs {
        let (s, _) = load(name);
        let kappas: Vec<f64> = if name.starts_with("fig1") { vec![10.0, 50.0, 100.0] } else { vec![50.0] };
        for kappa in kappas {
            let s = s.clone().with_kappa(kappa);
            let none = ExclusionProfile::none(s.num_tiers());
            let summary = gaussian_summary(&s, &none).unwrap();
            let plan = SimulationPlan::new(s, MC_DROPS, 4).with_x_grid(x.clone());
            let mc = simulate_awi(&plan, &none).unwrap();
            let mut excess = 0.0f64;
            for (xi, f) in x.iter().zip(&mc.cdf) {
                let (lo, hi) = cdf_band(*xi, &summary);
                excess = excess.max(lo - eps - f).max(f - hi - eps);
            }
            contained &= excess <= 0.0;
            details.push(format!("{name}@{kappa}: excess {excess:.4}"));
            if name == "fig1_powerlaw_alpha3.json" && kappa == 10.0 {
                campbell = Some((
                    mc.sample_mean / mc.analytic_mean - 1.0,
                    mc.sample_variance / mc.analytic_variance - 1.0,
                ));
            }
        }
    }
    report(4, "cdf containment", contained, &format!("eps = {eps:.4}; {}", details.join("; ")));
    let (dm, dv) = campbell.unwrap();
    let campbell_pass = dm.abs() <= 0.01 && dv.abs() <= 0.01;
    report(
        5,
        "campbell cross-check",
        campbell_pass,
        &format!("mean rel. error {dm:+.4}, variance rel. error {dv:+.4}"),
    );
    assert!(contained && campbell_pass);
}

#[test]
fn criterion_06_association() {
    let (s, _) = load("fig4_2tier_alpha3.json");
    let n = 1_000_000u64;
    let mut pass = true;
    let mut details = Vec::new();
    for kappa in [1.0, 10.0] {
        let s = s.clone().with_kappa(kappa);
        let assoc = Association::new(&s).unwrap();
        let counts = simulate_association(&s, n, 6).unwrap();
        for (k, &p) in assoc.p_star().iter().enumerate() {
            let freq = counts[k] as f64 / n as f64;
            let z = (freq - p) / (p * (1.0 - p) / n as f64).sqrt();
            pass &= z.abs() <= 3.0;
            details.push(format!("kappa {kappa} tier {k}: p* {p:.5} freq {freq:.5} z {z:+.2}"));
        }
        let seg = association_probability_segmented(&s).unwrap();
        let gen = association_probability_general(&s).unwrap();
        let mut gap = seg.iter().zip(&gen).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        for k in 0..2 {
            for i in 0..400 {
                let u = 0.01 * i as f64 + 0.003;
                let a = assoc.two_tier_pdf(k, u).unwrap();
                let b = assoc.conditional_pdf(k, u).unwrap();
                gap = gap.max((a - b).abs() / b.abs().max(1.0));
            }
            let mass = integrate_semi_infinite_with_breaks(
                |u| assoc.conditional_pdf(k, u).unwrap(),
                0.0,
                &assoc.breakpoints(k),
                &QuadratureSpec::default(),
            )
            .unwrap();
            pass &= (mass - 1.0).abs() <= 1e-6;
            details.push(format!("kappa {kappa} f_{k} mass {mass:.9}"));
        }
        pass &= gap <= 1e-9;
        details.push(format!("kappa {kappa} closed-form gap {gap:.1e}"));
    }
    report(6, "association oracle", pass, &details.join("; "));
    assert!(pass);
}

#[test]
fn criterion_07_outage_bracketing() {
    let taus = [0.05, 0.1, 0.2, 0.3, 0.5, 0.75, 1.0, 1.5, 2.0];
    let gamma = 0.15;
    let cases = [
        ("fig3_2tier_alpha2p7.json", 0.06),
        ("fig3_3tier_alpha2p7.json", 0.06),
        ("fig3_2tier_alpha3p3.json", 0.15),
        ("fig3_3tier_alpha3p3.json", 0.15),
    ];
    let mut misses = Vec::new();
    let mut width_fail = Vec::new();
    let mut monotone_fail = Vec::new();
    let mut checked = 0;
    for (name, limit) in cases {
        let (s, kappas) = load(name);
        let mut prev: Option<(f64, f64)> = None;
        for &kappa in &kappas {
            let s = s.clone().with_kappa(kappa);
            let analysis = CapacityAnalysis::barss(&s, AnalysisSettings::default()).unwrap();
            let plan = SimulationPlan::new(s, MC_DROPS, 7).with_tau_grid(taus.to_vec());
            let mc = simulate_barss(&plan, None, 8).unwrap();
            for (i, &tau) in taus.iter().enumerate() {
                let (lo, hi) = analysis.outage_bounds(tau).unwrap();
                let (wlo, whi) = wilson(mc.rates.outage[i], MC_DROPS as f64, 3.0);
                checked += 1;
                if whi < lo || wlo > hi {
                    misses.push(format!("{name} kappa {kappa} tau {tau}: {} vs [{lo:.4}, {hi:.4}]", mc.rates.outage[i]));
                }
            }
            let band = analysis.outage_capacity_band(gamma).unwrap();
            if band.width() > limit {
                width_fail.push(format!("{name} kappa {kappa}: width {:.4} > {limit}", band.width()));
            }
            if let Some((l, u)) = prev {
                if band.lower > l + 1e-9 || band.upper > u + 1e-9 {
                    monotone_fail.push(format!("{name} kappa {kappa}"));
                }
            }
            prev = Some((band.lower, band.upper));
        }
    }
    let pass = misses.is_empty() && width_fail.is_empty() && monotone_fail.is_empty();
    report(
        7,
        "outage bracketing",
        pass,
        &format!(
            "bracket misses {}/{checked} {:?}; width violations {:?}; monotonicity violations {:?}",
            misses.len(),
            misses,
            width_fail,
            monotone_fail
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_08_ergodic_bracketing() {
    let (s, kappas) = load("fig4_2tier_alpha3.json");
    let mut pass = true;
    let mut details = Vec::new();
    let mut prev_gap = f64::INFINITY;
    for kappa in kappas {
        let s = s.clone().with_kappa(kappa);
        let band = CapacityAnalysis::barss(&s, AnalysisSettings::default()).unwrap().ergodic_capacity_band().unwrap();
        let mc = simulate_barss(&SimulationPlan::new(s, MC_DROPS, 8), None, 8).unwrap().rates;
        let slack = 3.0 * mc.ergodic_std_error;
        let inside = mc.ergodic_mean >= band.lower - slack && mc.ergodic_mean <= band.upper + slack;
        let close = mc.ergodic_mean - band.lower <= 0.3;
        let shrinking = band.width() < prev_gap;
        prev_gap = band.width();
        pass &= inside && close && shrinking;
        details.push(format!(
            "kappa {kappa}: [{:.4}, {:.4}] mc {:.4}±{:.4}",
            band.lower, band.upper, mc.ergodic_mean, mc.ergodic_std_error
        ));
    }
    report(8, "ergodic bracketing", pass, &details.join("; "));
    assert!(pass);
}

#[test]
fn criterion_09_ase_shape() {
    let (s, kappas) = load("fig5_ase_2tier.json");
    let gammas = vec![0.15; s.num_tiers()];
    let mut inside = true;
    let mut heuristic = Vec::new();
    let mut details = Vec::new();
    for &kappa in &kappas {
        let s = s.clone().with_kappa(kappa);
        let band = CapacityAnalysis::barss(&s, AnalysisSettings::default()).unwrap().ase_band(&gammas).unwrap();
        let mc = simulate_barss(&SimulationPlan::new(s, MC_DROPS, 9), Some(&gammas), 8).unwrap();
        let (lo, hi) = mc.ase_interval.unwrap();
        let ok = hi >= band.lower && lo <= band.upper;
        inside &= ok;
        heuristic.push(band.heuristic);
        details.push(format!(
            "kappa {kappa}: [{:.4}, {:.4}] mc {:.4}{}",
            band.lower,
            band.upper,
            mc.ase.unwrap(),
            if ok { "" } else { " MISS" }
        ));
    }
    let max = heuristic.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let plateau = kappas
        .iter()
        .zip(heuristic.windows(2))
        .skip(1)
        .filter(|(k, _)| **k >= 12.0)
        .map(|(_, w)| (w[1] - w[0]).abs() / max)
        .fold(0.0, f64::max);
    let pass = inside && plateau < 0.01;
    report(
        9,
        "ase shape",
        pass,
        &format!("max relative step beyond kappa 12 = {plateau:.4}; {}", details.join("; ")),
    );
    assert!(pass);
}

fn run_cli(threads: usize, args: &[&str], out: &PathBuf) {
    let status = Command::new(env!("CARGO_BIN_EXE_hetnet-bounds"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("HETNET_THREADS", threads.to_string())
        .status()
        .unwrap();
    assert!(status.success());
}

#[test]
fn criterion_10_determinism() {
    let dir = std::env::temp_dir().join(format!("hetnet-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let fig3 = config_path("fig3_2tier_alpha2p7.json");
    let fig4 = config_path("fig4_2tier_alpha3.json");
    let fig1 = config_path("fig1_powerlaw_alpha3.json");
    let jobs: [(&str, Vec<&str>, &str); 3] = [
        ("mc", vec!["mc", "--realizations", "20000", "--seed", "11", "--config"], fig3.to_str().unwrap()),
        ("ergodic", vec!["ergodic", "--mc", "--realizations", "20000", "--seed", "12", "--config"], fig4.to_str().unwrap()),
        ("cdf", vec!["cdf", "--mc", "--realizations", "10000", "--seed", "13", "--config"], fig1.to_str().unwrap()),
    ];
    let mut pass = true;
    let mut details = Vec::new();
    for (tag, mut args, config) in jobs {
        args.push(config);
        run_cli(1, &args, &dir.join(format!("{tag}_1.csv")));
        run_cli(4, &args, &dir.join(format!("{tag}_4.csv")));
        let read = |threads: usize, suffix: &str| std::fs::read(dir.join(format!("{tag}_{threads}{suffix}.csv"))).unwrap();
        let suffixes: Vec<String> = if tag == "cdf" {
            ["1", "10", "50", "100"].iter().map(|k| format!("_kappa_{k}")).collect()
        } else {
            vec![String::new()]
        };
        let same = suffixes.iter().all(|sfx| read(1, sfx) == read(4, sfx));
        pass &= same;
        details.push(format!("{tag}: {}", if same { "identical" } else { "differs" }));
    }
    std::fs::remove_dir_all(&dir).ok();
    report(10, "determinism", pass, &details.join("; "));
    assert!(pass);
}
