//! Monte-Carlo oracle: PPP drops with fading, BARSS association and SINR.
//!
//! Realization `i` draws from ChaCha8 stream `i` of the plan seed, and
//! realizations are processed in fixed-size chunks merged in order, so
//! results do not depend on the number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::association::Association;
use crate::error::{Error, Result};
use crate::gaussian::{interference_moments, moment_integral, ExclusionProfile};
use crate::propagation::FadingSampler;
use crate::spatial::{sample_distances_between, sample_nearest_distance, NetworkScenario, TierConfig};

/// Realizations per work unit.
pub const CHUNK: u64 = 512;

/// Bound on the Edgeworth correction committed by the Gaussian far field.
pub const FAR_FIELD_TOLERANCE: f64 = 3e-4;

/// Largest share of the interference variance left to the Gaussian far field.
pub const FAR_FIELD_VARIANCE_SHARE: f64 = 1e-2;

/// Truncated mean allowed by [`FarFieldMode::Truncate`], relative to the total.
pub const TRUNCATION_TOLERANCE: f64 = 1e-4;

/// Serving distance tail allowed outside the BARSS window.
pub const ASSOCIATION_TAIL: f64 = 1e-6;

/// Treatment of base stations beyond the sampling window.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FarFieldMode {
    /// Ignore them; the window must hold all but 1e-4 of the mean.
    Truncate,
    /// Add a Gaussian with their exact mean and variance.
    #[default]
    GaussianTail,
}

/// Inputs shared by the simulations.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationPlan {
    pub scenario: NetworkScenario,
    pub realizations: u64,
    pub seed: u64,
    /// Per-tier window radii; chosen automatically when `None`.
    pub windows: Option<Vec<f64>>,
    pub far_field: FarFieldMode,
    /// Standardized interference levels for the empirical CDF, ascending.
    pub x_grid: Vec<f64>,
    /// Rates in nats/s/Hz for outage frequencies, ascending.
    pub tau_grid: Vec<f64>,
    /// Confidence level of the reported sampling slack.
    pub confidence: f64,
    /// Target outage for the overall rate quantile reported by BARSS drops.
    pub gamma: Option<f64>,
}

impl SimulationPlan {
    pub fn new(scenario: NetworkScenario, realizations: u64, seed: u64) -> Self {
        Self {
            scenario,
            realizations,
            seed,
            windows: None,
            far_field: FarFieldMode::default(),
            x_grid: Vec::new(),
            tau_grid: Vec::new(),
            confidence: 0.99,
            gamma: None,
        }
    }

    pub fn with_windows(mut self, windows: Vec<f64>) -> Self {
        self.windows = Some(windows);
        self
    }

    pub fn with_far_field(mut self, mode: FarFieldMode) -> Self {
        self.far_field = mode;
        self
    }

    pub fn with_x_grid(mut self, grid: Vec<f64>) -> Self {
        self.x_grid = grid;
        self
    }

    pub fn with_tau_grid(mut self, grid: Vec<f64>) -> Self {
        self.tau_grid = grid;
        self
    }

    pub fn with_confidence(mut self, confidence: f64) -> Self {
        self.confidence = confidence;
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = Some(gamma);
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        if self.realizations < 1000 {
            return Err(Error::InvalidConfig("at least 1000 realizations are required".into()));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::InvalidConfig("confidence must lie in (0, 1)".into()));
        }
        for (name, grid) in [("x_grid", &self.x_grid), ("tau_grid", &self.tau_grid)] {
            if grid.iter().any(|x| !x.is_finite()) || grid.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidConfig(format!("{name} must be finite and strictly ascending")));
            }
        }
        if let Some(g) = self.gamma {
            if !(g > 0.0 && g < 1.0) {
                return Err(Error::InvalidConfig("target outage must lie in (0, 1)".into()));
            }
        }
        if self.tau_grid.iter().any(|t| *t < 0.0) {
            return Err(Error::InvalidConfig("tau_grid must be non-negative".into()));
        }
        if let Some(w) = &self.windows {
            if w.len() != self.scenario.num_tiers() || w.iter().any(|r| !(*r > 0.0)) {
                return Err(Error::InvalidConfig("one positive window radius per tier is required".into()));
            }
        }
        Ok(())
    }
}

/// Dvoretzky–Kiefer–Wolfowitz half-width `√(ln(2/(1−c)) / (2n))`.
pub fn dkw_slack(n: u64, confidence: f64) -> f64 {
    ((2.0 / (1.0 - confidence)).ln() / (2.0 * n as f64)).sqrt()
}

fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Runs `f` on every chunk of realization indices in parallel and returns
/// the partial results in chunk order.
fn run_chunks<T: Send, F: Fn(std::ops::Range<u64>) -> T + Sync>(n: u64, f: F) -> Vec<T> {
    let chunks = n.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| f(c * CHUNK..((c + 1) * CHUNK).min(n)))
        .collect()
}

#[derive(Debug, Clone)]
struct FieldTier {
    tier: TierConfig,
    inner: f64,
    window: f64,
    sampler: FadingSampler,
}

impl FieldTier {
    fn gain(&self, t: f64) -> f64 {
        self.tier.power * self.tier.pathloss.gain(t)
    }
}

/// Near-field sampling windows and the far-field Gaussian.
#[derive(Debug, Clone)]
struct Field {
    tiers: Vec<FieldTier>,
    tail_mean: f64,
    tail_sd: f64,
}

impl Field {
    fn tail<R: Rng>(&self, rng: &mut R) -> f64 {
        if self.tail_sd == 0.0 {
            return self.tail_mean;
        }
        let z: f64 = StandardNormal.sample(rng);
        (self.tail_mean + self.tail_sd * z).max(0.0)
    }

    fn windows(&self) -> Vec<f64> {
        self.tiers.iter().map(|t| t.window).collect()
    }
}

/// Far-field criterion for tier `k` with window `r`; must not exceed the budget.
fn window_score(tier: &TierConfig, r: f64, mode: FarFieldMode, mean: f64, sd: f64) -> Result<f64> {
    match mode {
        FarFieldMode::Truncate => Ok(moment_integral(tier, 1, r)? / mean),
        FarFieldMode::GaussianTail => {
            let k2 = moment_integral(tier, 2, r)?;
            let k3 = moment_integral(tier, 3, r)?;
            let k4 = moment_integral(tier, 4, r)?;
            let edgeworth = k3 / (6.0 * sd.powi(3)) * 0.399 + k4 / (24.0 * sd.powi(4)) * 0.55;
            // Both criteria share one budget scale.
            Ok(edgeworth.max(k2 / (sd * sd) * FAR_FIELD_TOLERANCE / FAR_FIELD_VARIANCE_SHARE))
        }
    }
}

fn build_field(plan: &SimulationPlan, inner: &[f64], min_window: f64) -> Result<Field> {
    let s = &plan.scenario;
    let k_count = s.num_tiers();
    let excl = ExclusionProfile::generic(inner.to_vec());
    let (mean, variance) = interference_moments(s, &excl)?;
    let sd = variance.sqrt();
    let budget = match plan.far_field {
        FarFieldMode::Truncate => TRUNCATION_TOLERANCE,
        FarFieldMode::GaussianTail => FAR_FIELD_TOLERANCE / k_count as f64,
    };
    let mut tiers = Vec::with_capacity(k_count);
    let mut tail_mean = 0.0;
    let mut tail_var = 0.0;
    for k in 0..k_count {
        let tier = s.effective_tier(k);
        let lo = inner[k];
        let window = if lo.is_infinite() || mean == 0.0 {
            lo.max(min_window)
        } else if let Some(w) = &plan.windows {
            let w = w[k];
            if w < min_window || window_score(&tier, w.max(lo), plan.far_field, mean, sd)? > budget {
                return Err(Error::WindowTooSmall { tier: k, radius: w });
            }
            w
        } else {
            let score = |r: f64| window_score(&tier, r, plan.far_field, mean, sd);
            let mut hi = lo.max(min_window).max(1e-3);
            if score(hi)? > budget {
                let mut low;
                loop {
                    low = hi;
                    hi *= 2.0;
                    if hi > 1e9 {
                        return Err(Error::WindowTooSmall { tier: k, radius: hi });
                    }
                    if score(hi)? <= budget {
                        break;
                    }
                }
                while hi - low > 1e-3 * hi {
                    let mid = 0.5 * (low + hi);
                    if score(mid)? <= budget {
                        hi = mid;
                    } else {
                        low = mid;
                    }
                }
            }
            hi
        };
        if plan.far_field == FarFieldMode::GaussianTail && window.is_finite() {
            let from = window.max(lo);
            tail_mean += moment_integral(&tier, 1, from)?;
            tail_var += moment_integral(&tier, 2, from)?;
        }
        let sampler = tier.fading.sampler();
        tiers.push(FieldTier {
            tier,
            inner: lo,
            window,
            sampler,
        });
    }
    Ok(Field {
        tiers,
        tail_mean,
        tail_sd: tail_var.sqrt(),
    })
}

/// Empirical standardized interference CDF and moments.
#[derive(Debug, Clone, PartialEq)]
pub struct AwiResult {
    pub x_grid: Vec<f64>,
    /// `P̂((I − E[I])/√Var[I] ≤ x)` with analytical moments.
    pub cdf: Vec<f64>,
    /// DKW half-width at the plan's confidence.
    pub slack: f64,
    pub sample_mean: f64,
    pub sample_variance: f64,
    pub analytic_mean: f64,
    pub analytic_variance: f64,
    pub windows: Vec<f64>,
    /// Share of the analytical mean carried by the far-field Gaussian.
    pub far_field_mean_fraction: f64,
}

/// Aggregate interference at the origin, interferers beyond `exclusion`.
pub fn simulate_awi(plan: &SimulationPlan, exclusion: &ExclusionProfile) -> Result<AwiResult> {
    plan.validate()?;
    let s = &plan.scenario;
    let (mean, variance) = interference_moments(s, exclusion)?;
    if !(variance > 0.0) {
        return Err(Error::DegenerateVariance);
    }
    let sd = variance.sqrt();
    let field = build_field(plan, &exclusion.radii, 0.0)?;
    let grid = &plan.x_grid;
    let parts = run_chunks(plan.realizations, |range| {
        let mut counts = vec![0u64; grid.len() + 1];
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        let mut buf = Vec::new();
        for i in range {
            let mut rng = stream(plan.seed, i);
            let mut total = 0.0;
            for ft in &field.tiers {
                buf.clear();
                sample_distances_between(&ft.tier, ft.inner, ft.window, &mut rng, &mut buf);
                for &t in &buf {
                    total += ft.gain(t) * ft.sampler.sample(&mut rng);
                }
            }
            total += field.tail(&mut rng);
            let d = total - mean;
            sum += d;
            sum_sq += d * d;
            let z = d / sd;
            counts[grid.partition_point(|x| *x < z)] += 1;
        }
        (counts, sum, sum_sq)
    });
    let n = plan.realizations as f64;
    let mut counts = vec![0u64; grid.len() + 1];
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for (c, a, b) in parts {
        for (acc, v) in counts.iter_mut().zip(c) {
            *acc += v;
        }
        sum += a;
        sum_sq += b;
    }
    let mut running = 0u64;
    let cdf = counts[..grid.len()]
        .iter()
        .map(|c| {
            running += c;
            running as f64 / n
        })
        .collect();
    let centered = sum / n;
    Ok(AwiResult {
        x_grid: grid.clone(),
        cdf,
        slack: dkw_slack(plan.realizations, plan.confidence),
        sample_mean: mean + centered,
        sample_variance: (sum_sq - n * centered * centered) / (n - 1.0),
        analytic_mean: mean,
        analytic_variance: variance,
        windows: field.windows(),
        far_field_mean_fraction: if mean > 0.0 { field.tail_mean / mean } else { 0.0 },
    })
}

/// Equal-width histogram on `[0, upper)`; samples beyond land in `overflow`.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub upper: f64,
    pub counts: Vec<u64>,
    pub overflow: u64,
}

impl Histogram {
    fn new(upper: f64, bins: usize) -> Self {
        Self {
            upper,
            counts: vec![0; bins],
            overflow: 0,
        }
    }

    fn add(&mut self, x: f64) {
        let bins = self.counts.len();
        let i = (x / self.upper * bins as f64) as usize;
        if i < bins {
            self.counts[i] += 1;
        } else {
            self.overflow += 1;
        }
    }

    fn merge(&mut self, other: &Histogram) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.overflow += other.overflow;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.overflow
    }

    pub fn bin_width(&self) -> f64 {
        self.upper / self.counts.len() as f64
    }
}

/// Empirical rate statistics of one simulated link population.
#[derive(Debug, Clone, PartialEq)]
pub struct RateResult {
    pub tau_grid: Vec<f64>,
    /// `P̂(log(1 + SINR) < τ)`.
    pub outage: Vec<f64>,
    /// Binomial standard errors of `outage`.
    pub outage_std_error: Vec<f64>,
    pub ergodic_mean: f64,
    pub ergodic_std_error: f64,
}

/// BARSS simulation summary.
#[derive(Debug, Clone, PartialEq)]
pub struct BarssResult {
    pub association_counts: Vec<u64>,
    pub association: Vec<f64>,
    /// Serving distance histograms per tier.
    pub distance: Vec<Histogram>,
    pub rates: RateResult,
    /// Per-tier empirical outage capacity, the `γ_k`-quantile of the rate.
    pub tier_capacity: Vec<Option<f64>>,
    /// `Σ_k λ_k (1 − γ_k) Ĉ_k` when every tier has served users.
    pub ase: Option<f64>,
    /// ASE from order statistics `±3σ` around each quantile.
    pub ase_interval: Option<(f64, f64)>,
    /// Empirical `γ`-quantile of the rate and its ±3σ order-statistic
    /// interval, when the plan sets `gamma`.
    pub outage_capacity: Option<(f64, f64, f64)>,
    /// Realizations redrawn because the windows held no base station.
    pub resampled: u64,
    pub windows: Vec<f64>,
}

#[derive(Debug, Clone)]
struct RateAccumulator {
    below: Vec<u64>,
    sum: f64,
    sum_sq: f64,
}

impl RateAccumulator {
    fn new(n: usize) -> Self {
        Self {
            below: vec![0; n + 1],
            sum: 0.0,
            sum_sq: 0.0,
        }
    }

    fn add(&mut self, rate: f64, grid: &[f64]) {
        // rate < τ for every τ after the partition point
        self.below[grid.partition_point(|t| *t <= rate)] += 1;
        self.sum += rate;
        self.sum_sq += rate * rate;
    }

    fn merge(&mut self, other: &RateAccumulator) {
        for (a, b) in self.below.iter_mut().zip(&other.below) {
            *a += b;
        }
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    fn finish(&self, grid: &[f64], n: u64) -> RateResult {
        let nf = n as f64;
        let mut running = 0u64;
        let outage: Vec<f64> = self.below[..grid.len()]
            .iter()
            .map(|c| {
                running += c;
                running as f64 / nf
            })
            .collect();
        let mean = self.sum / nf;
        let var = ((self.sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0);
        RateResult {
            tau_grid: grid.to_vec(),
            outage_std_error: outage.iter().map(|p| (p * (1.0 - p) / nf).sqrt()).collect(),
            outage,
            ergodic_mean: mean,
            ergodic_std_error: (var / nf).sqrt(),
        }
    }
}

fn rate(signal: f64, interference: f64, s: &NetworkScenario) -> f64 {
    (signal / (s.noise + interference / s.processing_gain)).ln_1p()
}

/// Smallest radius with serving distance tail at most `ASSOCIATION_TAIL`.
fn association_window(assoc: &Association) -> Result<f64> {
    let mut hi = 1.0;
    while assoc.serving_distance_tail(hi)? > ASSOCIATION_TAIL {
        hi *= 2.0;
        if hi > 1e9 {
            return Err(Error::WindowTooSmall { tier: 0, radius: hi });
        }
    }
    let mut lo = 0.0;
    while hi - lo > 1e-3 * hi {
        let mid = 0.5 * (lo + hi);
        if assoc.serving_distance_tail(mid)? > ASSOCIATION_TAIL {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Empirical `γ`-quantile with an order-statistic interval.
fn quantile_with_interval(sorted: &[f64], gamma: f64) -> (f64, f64, f64) {
    let n = sorted.len() as f64;
    let at = |q: f64| sorted[((q * n).floor() as usize).min(sorted.len() - 1)];
    let half = 3.0 * (gamma * (1.0 - gamma) / n).sqrt();
    (at(gamma), at((gamma - half).max(0.0)), at((gamma + half).min(1.0)))
}

/// BARSS drops: association, serving distance, SINR and rate statistics.
///
/// `gammas`, one per tier, enables the ASE estimate: each tier's outage
/// capacity is the empirical `γ_k`-quantile of the rate of users it serves,
/// which by exchangeability stands for the user served by each of its base
/// stations.
pub fn simulate_barss(plan: &SimulationPlan, gammas: Option<&[f64]>, histogram_bins: usize) -> Result<BarssResult> {
    plan.validate()?;
    let s = &plan.scenario;
    let k_count = s.num_tiers();
    if let Some(g) = gammas {
        if g.len() != k_count || g.iter().any(|x| !(*x > 0.0 && *x < 1.0)) {
            return Err(Error::InvalidConfig("one target outage in (0, 1) per tier is required".into()));
        }
    }
    let assoc = Association::new(s)?;
    let reach = association_window(&assoc)?;
    let field = build_field(plan, &vec![0.0; k_count], reach)?;
    let hist_upper = reach;
    let grid = &plan.tau_grid;
    let keep_rates = gammas.is_some() || plan.gamma.is_some();
    let scores: Vec<f64> = s.tiers.iter().map(|t| t.biased_power()).collect();

    struct Part {
        assoc: Vec<u64>,
        hist: Vec<Histogram>,
        rates: RateAccumulator,
        per_tier: Vec<Vec<f64>>,
        resampled: u64,
    }

    let parts = run_chunks(plan.realizations, |range| {
        let mut part = Part {
            assoc: vec![0; k_count],
            hist: vec![Histogram::new(hist_upper, histogram_bins); k_count],
            rates: RateAccumulator::new(grid.len()),
            per_tier: vec![Vec::new(); k_count],
            resampled: 0,
        };
        let mut bufs: Vec<Vec<f64>> = vec![Vec::new(); k_count];
        for i in range {
            let mut rng = stream(plan.seed, i);
            let (k, idx) = loop {
                for (ft, buf) in field.tiers.iter().zip(bufs.iter_mut()) {
                    buf.clear();
                    sample_distances_between(&ft.tier, ft.inner, ft.window, &mut rng, buf);
                }
                let mut best: Option<(f64, usize, usize)> = None;
                for (k, buf) in bufs.iter().enumerate() {
                    let Some((idx, &d)) = buf.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)) else {
                        continue;
                    };
                    let score = scores[k] * field.tiers[k].tier.pathloss.gain(d);
                    if best.is_none_or(|b| score > b.0) {
                        best = Some((score, k, idx));
                    }
                }
                match best {
                    Some((_, k, idx)) => break (k, idx),
                    None => part.resampled += 1,
                }
            };
            let r_star = bufs[k][idx];
            let serving = &field.tiers[k];
            let signal = serving.gain(r_star) * serving.sampler.sample(&mut rng);
            let mut interference = 0.0;
            let mut skipped = 0;
            for (j, (ft, buf)) in field.tiers.iter().zip(&bufs).enumerate() {
                for (m, &t) in buf.iter().enumerate() {
                    if j == k && m == idx {
                        skipped += 1;
                        continue;
                    }
                    interference += ft.gain(t) * ft.sampler.sample(&mut rng);
                }
            }
            debug_assert_eq!(skipped, 1, "serving base station must be excluded exactly once");
            interference += field.tail(&mut rng);
            let r = rate(signal, interference, s);
            part.assoc[k] += 1;
            part.hist[k].add(r_star);
            part.rates.add(r, grid);
            if keep_rates {
                part.per_tier[k].push(r);
            }
        }
        part
    });

    let mut assoc_counts = vec![0u64; k_count];
    let mut hist = vec![Histogram::new(hist_upper, histogram_bins); k_count];
    let mut rates = RateAccumulator::new(grid.len());
    let mut per_tier: Vec<Vec<f64>> = vec![Vec::new(); k_count];
    let mut resampled = 0;
    for p in parts {
        for k in 0..k_count {
            assoc_counts[k] += p.assoc[k];
            hist[k].merge(&p.hist[k]);
            per_tier[k].extend_from_slice(&p.per_tier[k]);
        }
        rates.merge(&p.rates);
        resampled += p.resampled;
    }
    let n = plan.realizations as f64;
    let outage_capacity = plan.gamma.map(|g| {
        let mut all: Vec<f64> = per_tier.iter().flatten().copied().collect();
        all.sort_by(f64::total_cmp);
        quantile_with_interval(&all, g)
    });
    let mut tier_capacity = vec![None; k_count];
    let (mut ase, mut ase_interval) = (None, None);
    if let Some(g) = gammas {
        let mut total = Some((0.0, 0.0, 0.0));
        for k in 0..k_count {
            let v = &mut per_tier[k];
            if v.is_empty() {
                total = None;
                continue;
            }
            v.sort_by(f64::total_cmp);
            let (q, lo, hi) = quantile_with_interval(v, g[k]);
            tier_capacity[k] = Some(q);
            let scale = s.lambda(k) * (1.0 - g[k]);
            total = total.map(|t| (t.0 + scale * q, t.1 + scale * lo, t.2 + scale * hi));
        }
        if let Some((q, lo, hi)) = total {
            ase = Some(q);
            ase_interval = Some((lo, hi));
        }
    }
    Ok(BarssResult {
        association: assoc_counts.iter().map(|&c| c as f64 / n).collect(),
        association_counts: assoc_counts,
        distance: hist,
        rates: rates.finish(grid, plan.realizations),
        tier_capacity,
        ase,
        ase_interval,
        outage_capacity,
        resampled,
        windows: field.windows(),
    })
}

/// Rate statistics of a user served by tier `k` at distance `r`, interferers
/// beyond `exclusion`.
pub fn simulate_link(plan: &SimulationPlan, k: usize, r: f64, exclusion: &ExclusionProfile) -> Result<RateResult> {
    plan.validate()?;
    let s = &plan.scenario;
    if k >= s.num_tiers() || !(r >= 0.0) {
        return Err(Error::InvalidConfig("serving tier or distance out of range".into()));
    }
    let field = build_field(plan, &exclusion.radii, 0.0)?;
    let serving = s.effective_tier(k);
    let serving_gain = serving.power * serving.pathloss.gain(r);
    let serving_sampler = serving.fading.sampler();
    let grid = &plan.tau_grid;
    let parts = run_chunks(plan.realizations, |range| {
        let mut acc = RateAccumulator::new(grid.len());
        let mut buf = Vec::new();
        for i in range {
            let mut rng = stream(plan.seed, i);
            let signal = serving_gain * serving_sampler.sample(&mut rng);
            let mut interference = 0.0;
            for ft in &field.tiers {
                buf.clear();
                sample_distances_between(&ft.tier, ft.inner, ft.window, &mut rng, &mut buf);
                for &t in &buf {
                    interference += ft.gain(t) * ft.sampler.sample(&mut rng);
                }
            }
            interference += field.tail(&mut rng);
            acc.add(rate(signal, interference, s), grid);
        }
        acc
    });
    let mut acc = RateAccumulator::new(grid.len());
    for p in &parts {
        acc.merge(p);
    }
    Ok(acc.finish(grid, plan.realizations))
}

/// BARSS association counts from exact per-tier nearest distances.
pub fn simulate_association(scenario: &NetworkScenario, realizations: u64, seed: u64) -> Result<Vec<u64>> {
    scenario.validate()?;
    let k_count = scenario.num_tiers();
    let tiers: Vec<TierConfig> = (0..k_count).map(|k| scenario.effective_tier(k)).collect();
    let parts = run_chunks(realizations, |range| {
        let mut counts = vec![0u64; k_count];
        for i in range {
            let mut rng = stream(seed, i);
            let mut best = (f64::NEG_INFINITY, 0);
            for (k, t) in tiers.iter().enumerate() {
                let d = sample_nearest_distance(t, &mut rng);
                let score = t.biased_power() * t.pathloss.gain(d);
                if score > best.0 {
                    best = (score, k);
                }
            }
            counts[best.1] += 1;
        }
        counts
    });
    let mut counts = vec![0u64; k_count];
    for p in parts {
        for (a, b) in counts.iter_mut().zip(p) {
            *a += b;
        }
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::association::association_probability;
    use crate::propagation::{FadingModel, PathLossModel};
    use crate::spatial::RadialDensity;

    const PL3: PathLossModel = PathLossModel::BoundedPowerLaw { alpha: 3.0 };

    fn single() -> NetworkScenario {
        NetworkScenario::new(vec![TierConfig::new(1.0, 1.0, PL3, FadingModel::Rayleigh)])
    }

    #[test]
    fn dkw_reference() {
        assert!((dkw_slack(100_000, 0.99) - 0.005147).abs() < 1e-6);
    }

    #[test]
    fn guard_zone_window_gives_zero_interference() {
        let s = NetworkScenario::new(vec![TierConfig::new(
            1.0,
            1.0,
            PL3,
            FadingModel::Deterministic { h: 1.0 },
        )
        .with_density(RadialDensity::GuardZone { radius: 5.0 })]);
        let plan = SimulationPlan::new(s, 1000, 3).with_far_field(FarFieldMode::Truncate);
        let field = build_field(&plan, &[0.0], 0.0).unwrap();
        let mut rng = stream(1, 0);
        let ft = &field.tiers[0];
        let mut buf = Vec::new();
        for _ in 0..100 {
            buf.clear();
            sample_distances_between(&ft.tier, ft.inner, 5.0, &mut rng, &mut buf);
            assert!(buf.is_empty());
        }
    }

    #[test]
    fn explicit_window_is_audited() {
        let plan = SimulationPlan::new(single(), 1000, 1)
            .with_far_field(FarFieldMode::Truncate)
            .with_windows(vec![10.0]);
        let err = simulate_awi(&plan, &ExclusionProfile::none(1)).unwrap_err();
        assert!(matches!(err, Error::WindowTooSmall { tier: 0, .. }));
    }

    #[test]
    fn awi_is_deterministic_and_matches_campbell() {
        let plan = SimulationPlan::new(single().with_kappa(5.0), 20_000, 42).with_x_grid(vec![-1.0, 0.0, 1.0]);
        let a = simulate_awi(&plan, &ExclusionProfile::none(1)).unwrap();
        let b = simulate_awi(&plan, &ExclusionProfile::none(1)).unwrap();
        assert_eq!(a, b);
        assert!((a.sample_mean / a.analytic_mean - 1.0).abs() < 0.02, "{a:?}");
        assert!((a.sample_variance / a.analytic_variance - 1.0).abs() < 0.1, "{a:?}");
        assert!(a.cdf.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn single_tier_association_is_certain() {
        let plan = SimulationPlan::new(single(), 2000, 7).with_tau_grid(vec![0.5, 1.0]);
        let r = simulate_barss(&plan, Some(&[0.2]), 10).unwrap();
        assert_eq!(r.association_counts, vec![2000]);
        assert!(r.ase.is_some());
        assert!(r.rates.outage[0] <= r.rates.outage[1]);
    }

    #[test]
    fn identical_tiers_split_evenly() {
        let t = TierConfig::new(1.0, 1.0, PL3, FadingModel::Rayleigh);
        let s = NetworkScenario::new(vec![t.clone(), t]);
        let n = 100_000;
        let counts = simulate_association(&s, n, 11).unwrap();
        let sigma = (0.25 / n as f64).sqrt();
        assert!((counts[0] as f64 / n as f64 - 0.5).abs() < 3.0 * sigma, "{counts:?}");
    }

    #[test]
    fn association_frequencies_match_analysis() {
        let s = NetworkScenario::new(vec![
            TierConfig::new(10.0, 0.1, PL3, FadingModel::Rayleigh),
            TierConfig::new(1.0, 1.0, PL3, FadingModel::Rayleigh),
        ])
        .with_kappa(2.0);
        let p = association_probability(&s).unwrap();
        let n = 200_000;
        let counts = simulate_association(&s, n, 5).unwrap();
        let f = counts[0] as f64 / n as f64;
        assert!((f - p[0]).abs() < 3.0 * (p[0] * (1.0 - p[0]) / n as f64).sqrt(), "{f} vs {}", p[0]);
    }
}
