//! The `ζ` transform, the `V±` kernels and capacity bounds: outage
//! probability and outage capacity, ergodic capacity and area spectral
//! efficiency, for a fixed link or under BARSS association.

use rayon::prelude::*;

use crate::association::{association_integrand, barss_exclusion, Association};
use crate::error::{Error, NumericsError, Result, TierContext};
use crate::gaussian::{
    band_at, berry_esseen_crossover, gaussian_summary, interference_moments, ExclusionProfile, GaussianSummary,
    BE_UNIFORM,
};
use crate::numerics::{
    integrate_semi_infinite_with_breaks, semi_infinite_panels, std_normal_quantile, sup_threshold, QuadratureRule,
    QuadratureSpec, ThresholdSearch,
};
use crate::propagation::{FadingModel, PathLossModel};
use crate::spatial::{NetworkScenario, RadialDensity};

/// Lower and upper bound on a capacity metric, with their midpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityBand {
    pub lower: f64,
    pub upper: f64,
    pub heuristic: f64,
}

impl CapacityBand {
    pub fn new(lower: f64, upper: f64) -> Self {
        Self {
            lower,
            upper,
            heuristic: 0.5 * (lower + upper),
        }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Which side of the CDF band to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    /// `V⁻ = max(0, Ψ − Ξc)`.
    Lower,
    /// `V⁺ = min(1, Ψ + Ξc)`.
    Upper,
}

/// How the test user is attached to the network.
#[derive(Debug, Clone, PartialEq)]
pub enum Policy {
    /// Served by the BS maximizing `β P G`.
    Barss,
    /// Served by tier `tier` at `distance`, interferers beyond `exclusion`.
    Generic {
        tier: usize,
        distance: f64,
        exclusion: ExclusionProfile,
    },
}

/// Tolerances and options shared by the capacity computations.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisSettings {
    /// Multiplies every `Ξ`; `0` gives the plain Gaussian approximation.
    pub xi_scale: f64,
    /// Expectations over the serving fading gain.
    pub fading_spec: QuadratureSpec,
    /// Adaptive rule over the serving distance.
    pub distance_spec: QuadratureSpec,
    /// Widest distance panel as a fraction of the median serving distance.
    pub distance_panel_fraction: f64,
    /// Integrals over the rate variable.
    pub rate_spec: QuadratureSpec,
    pub search: ThresholdSearch,
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        Self {
            xi_scale: 1.0,
            fading_spec: QuadratureSpec {
                relative_tolerance: 1e-10,
                absolute_floor: 1e-14,
                max_subdivisions: 2000,
            },
            distance_spec: QuadratureSpec {
                relative_tolerance: 1e-9,
                absolute_floor: 1e-300,
                max_subdivisions: 2000,
            },
            distance_panel_fraction: 0.25,
            rate_spec: QuadratureSpec {
                relative_tolerance: 1e-9,
                absolute_floor: 1e-14,
                max_subdivisions: 2000,
            },
            search: ThresholdSearch {
                initial_step: 1e-2,
                ..ThresholdSearch::default()
            },
        }
    }
}

impl AnalysisSettings {
    pub fn with_xi_scale(mut self, xi_scale: f64) -> Self {
        self.xi_scale = xi_scale;
        self
    }
}

/// `ζ = ((P_k h G_k(r)/(e^τ − 1) − N₀)·PG − E[I]) / √Var[I]`.
pub fn zeta(scenario: &NetworkScenario, summary: &GaussianSummary, k: usize, h: f64, tau: f64, r: f64) -> f64 {
    let t = &scenario.tiers[k];
    let s = t.power * h * t.pathloss.gain(r);
    let first = if s == 0.0 { 0.0 } else { s / tau.exp_m1() };
    ((first - scenario.noise) * scenario.processing_gain - summary.mean) / summary.std_dev()
}

/// `(V⁻, V⁺)` at one fading gain, rate and distance.
pub fn v_kernels(scenario: &NetworkScenario, summary: &GaussianSummary, k: usize, h: f64, tau: f64, r: f64) -> (f64, f64) {
    let t = &scenario.tiers[k];
    let s = t.power * h * t.pathloss.gain(r);
    if s < scenario.noise * tau.exp_m1() {
        return (0.0, 0.0);
    }
    if summary.variance == 0.0 {
        let a = (s / tau.exp_m1() - scenario.noise) * scenario.processing_gain;
        let v = if a > summary.mean { 1.0 } else { 0.0 };
        return (v, v);
    }
    band_at(zeta(scenario, summary, k, h, tau, r), summary.xi)
}

/// Interference statistics for an exclusion profile, tolerating zero variance.
fn link_summary(scenario: &NetworkScenario, excl: &ExclusionProfile, xi_scale: f64) -> Result<GaussianSummary> {
    match gaussian_summary(scenario, excl) {
        Ok(mut s) => {
            s.xi *= xi_scale;
            Ok(s)
        }
        Err(Error::DegenerateVariance) => {
            let (mean, _) = interference_moments(scenario, excl)?;
            Ok(GaussianSummary {
                mean,
                variance: 0.0,
                xi: 0.0,
            })
        }
        Err(e) => Err(e),
    }
}

const H0_GRID: [f64; 12] = [0.05, 0.1, 0.2, 0.35, 0.5, 0.7, 0.85, 1.0, 1.25, 1.5, 2.0, 3.0];

#[derive(Debug, Clone)]
struct VoidTier {
    intensity: f64,
    power: f64,
    pathloss: PathLossModel,
    density: RadialDensity,
    excluded: f64,
    levels: Vec<(f64, f64)>,
}

/// Upper bound on `P(I < a)` from the absence of a dominant interferer.
///
/// For each tier and fading level `h₀`, interferers with gain at least `h₀`
/// inside `G⁻¹(a/(P h₀))` form a thinned PPP; any one of them alone pushes
/// `I` past `a`.
#[derive(Debug, Clone)]
pub struct VoidBound {
    tiers: Vec<VoidTier>,
}

impl VoidBound {
    pub fn new(scenario: &NetworkScenario, excl: &ExclusionProfile) -> Self {
        let tiers = (0..scenario.num_tiers())
            .map(|i| {
                let t = scenario.effective_tier(i);
                let levels = match t.fading {
                    FadingModel::Deterministic { h } => vec![(h, 1.0)],
                    f => H0_GRID.iter().map(|&h0| (h0, f.ccdf(h0))).collect(),
                };
                VoidTier {
                    intensity: t.intensity,
                    power: t.power,
                    excluded: t.density.cumulative(excl.radii[i]),
                    pathloss: t.pathloss,
                    density: t.density,
                    levels,
                }
            })
            .collect();
        Self { tiers }
    }

    /// `D(a)`, at least `P(I < a)`.
    pub fn probability_below(&self, a: f64) -> f64 {
        if a <= 0.0 {
            return 0.0;
        }
        let mut exponent = 0.0;
        for t in &self.tiers {
            let mut best = 0.0f64;
            for &(h0, tail) in &t.levels {
                if tail == 0.0 {
                    continue;
                }
                let radius = t.pathloss.inverse(a / (t.power * h0));
                let extra = t.density.cumulative(radius) - t.excluded;
                if extra > 0.0 {
                    best = best.max(tail * extra);
                }
            }
            exponent += t.intensity * best;
        }
        (-exponent).exp()
    }
}

/// `E[H/(b + H)]` for the serving fading law.
fn rate_weight(fading: &FadingModel, b: f64, spec: &QuadratureSpec) -> std::result::Result<f64, NumericsError> {
    if b <= 0.0 {
        return Ok(1.0);
    }
    match fading {
        FadingModel::Deterministic { h } => Ok(h / (b + h)),
        f => integrate_semi_infinite_with_breaks(|h| f.pdf(h) * h / (b + h), 0.0, &[b.min(8.0), 1.0], spec),
    }
}

/// `b ↦ E[H/(b + H)]` tabulated on a logarithmic grid with cubic Hermite
/// interpolation; direct quadrature outside the grid.
#[derive(Debug, Clone)]
pub struct RateWeight {
    fading: FadingModel,
    spec: QuadratureSpec,
    log_lo: f64,
    step: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl RateWeight {
    const LOG_LO: f64 = -14.0;
    const LOG_HI: f64 = 18.0;
    const STEP: f64 = 1.0 / 32.0;

    pub fn new(fading: FadingModel, spec: &QuadratureSpec) -> std::result::Result<Self, NumericsError> {
        let mut table = Self {
            fading,
            spec: *spec,
            log_lo: Self::LOG_LO,
            step: Self::STEP,
            values: Vec::new(),
            slopes: Vec::new(),
        };
        if fading.is_deterministic() {
            return Ok(table);
        }
        let n = ((Self::LOG_HI - Self::LOG_LO) / Self::STEP).round() as usize + 1;
        for i in 0..n {
            let b = (Self::LOG_LO + i as f64 * Self::STEP).exp();
            table.values.push(rate_weight(&fading, b, spec)?);
            // d/d(ln b) of E[H/(b+H)] is −b E[H/(b+H)²].
            let d = integrate_semi_infinite_with_breaks(
                |h| fading.pdf(h) * h / ((b + h) * (b + h)),
                0.0,
                &[b.min(8.0), 1.0],
                spec,
            )?;
            table.slopes.push(-b * d);
        }
        Ok(table)
    }

    pub fn eval(&self, b: f64) -> std::result::Result<f64, NumericsError> {
        if b <= 0.0 {
            return Ok(1.0);
        }
        if self.values.is_empty() {
            return rate_weight(&self.fading, b, &self.spec);
        }
        let x = (b.ln() - self.log_lo) / self.step;
        if !(x >= 0.0) || x >= (self.values.len() - 1) as f64 {
            return rate_weight(&self.fading, b, &self.spec);
        }
        let i = x.floor() as usize;
        let t = x - i as f64;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.slopes[i] * self.step, self.slopes[i + 1] * self.step);
        let t2 = t * t;
        let t3 = t2 * t;
        Ok((2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * m1)
    }
}

/// One serving link: received signal power scale and interference statistics.
#[derive(Debug, Clone)]
pub struct LinkBudget {
    /// `P_k G_k(r)`.
    pub signal: f64,
    pub noise: f64,
    pub processing_gain: f64,
    pub fading: FadingModel,
    pub summary: GaussianSummary,
    void: VoidBound,
}

impl LinkBudget {
    pub fn new(scenario: &NetworkScenario, k: usize, r: f64, excl: &ExclusionProfile, xi_scale: f64) -> Result<Self> {
        let t = &scenario.tiers[k];
        Ok(Self {
            signal: t.power * t.pathloss.gain(r),
            noise: scenario.noise,
            processing_gain: scenario.processing_gain,
            fading: t.fading,
            summary: link_summary(scenario, excl, xi_scale)?,
            void: VoidBound::new(scenario, excl),
        })
    }

    /// Kernel as a function of the interference budget `a`.
    fn kernel(&self, a: f64, bound: Bound) -> f64 {
        if a <= 0.0 {
            return 0.0;
        }
        let s = &self.summary;
        if s.variance == 0.0 {
            return if a > s.mean { 1.0 } else { 0.0 };
        }
        let (lo, hi) = band_at((a - s.mean) / s.std_dev(), s.xi);
        match bound {
            Bound::Lower => lo,
            Bound::Upper => hi,
        }
    }

    /// Values of `a` where the kernel has kinks.
    fn budget_breaks(&self) -> Vec<f64> {
        let s = &self.summary;
        if s.variance == 0.0 {
            return vec![s.mean];
        }
        let x = berry_esseen_crossover();
        let mut z = vec![-x, x];
        let w = BE_UNIFORM * s.xi;
        if w > 0.0 && w < 1.0 {
            for q in [std_normal_quantile(1.0 - w), std_normal_quantile(w)] {
                if q.abs() < x {
                    z.push(q);
                }
            }
        }
        z.into_iter().map(|z| s.mean + s.std_dev() * z).filter(|a| *a > 0.0).collect()
    }

    /// Success probability bound `E_h[V±]` at rate `tau`.
    pub fn expected_kernel(&self, tau: f64, bound: Bound, spec: &QuadratureSpec) -> std::result::Result<f64, NumericsError> {
        if tau <= 0.0 {
            return Ok(1.0);
        }
        if self.signal == 0.0 {
            return Ok(0.0);
        }
        let e = tau.exp_m1();
        let pg = self.processing_gain;
        // h at which the interference budget equals `a`.
        let h_of = |a: f64| (a / pg + self.noise) * e / self.signal;
        let budget = |h: f64| (self.signal * h / e - self.noise) * pg;
        if let FadingModel::Deterministic { h } = self.fading {
            return Ok(self.kernel(budget(h), bound));
        }
        if self.summary.variance == 0.0 {
            return Ok(self.fading.ccdf(h_of(self.summary.mean)));
        }
        let breaks: Vec<f64> = self.budget_breaks().into_iter().map(h_of).chain([1.0]).collect();
        let fading = self.fading;
        integrate_semi_infinite_with_breaks(
            |h| self.kernel(budget(h), bound) * fading.pdf(h),
            h_of(0.0),
            &breaks,
            spec,
        )
    }

    /// `∫₀^∞ E_h[·] dτ` with `V⁻` for the lower bound and `min(V⁺, D)` for the upper.
    ///
    /// The rate integral is rewritten over the interference budget `a`,
    /// where `∫ f(a(h, τ)) dτ` has the kernel `E[S h/(y(y + S h))]/PG` with
    /// `y = a/PG + N₀` and `S` the signal scale.
    /// `weights` must be built for this link's fading law.
    pub fn ergodic(&self, bound: Bound, weights: &RateWeight, spec: &QuadratureSpec) -> std::result::Result<f64, NumericsError> {
        if self.signal == 0.0 {
            return Ok(0.0);
        }
        let pg = self.processing_gain;
        let f = |a: f64| {
            let v = self.kernel(a, bound);
            let v = match bound {
                Bound::Lower => v,
                Bound::Upper => v.min(self.void.probability_below(a)),
            };
            if v == 0.0 {
                return Ok(0.0);
            }
            let y = a / pg + self.noise;
            let w = weights.eval(y / self.signal)?;
            Ok(v * w / (y * pg))
        };
        let failure = std::cell::RefCell::new(None);
        let mut breaks = self.budget_breaks();
        breaks.push(pg * self.signal);
        let value = integrate_semi_infinite_with_breaks(
            |a| match f(a) {
                Ok(v) => v,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    0.0
                }
            },
            0.0,
            &breaks,
            spec,
        );
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        value
    }
}

/// Splits panels carrying non-negligible mass of the density `f` so none is
/// wider than `fraction` times the median.
fn refine_panels<F: Fn(f64) -> f64>(panels: &[(f64, f64)], f: F, fraction: f64) -> Vec<(f64, f64)> {
    let masses: Vec<f64> = panels
        .iter()
        .map(|&(a, b)| QuadratureRule::from_panels(vec![(a, b)]).apply(&f))
        .collect();
    let mut acc = 0.0;
    let mut median = panels.last().map_or(0.0, |p| p.1);
    for (p, m) in panels.iter().zip(&masses) {
        if acc + m >= 0.5 {
            median = p.0 + (p.1 - p.0) * ((0.5 - acc) / m).clamp(0.0, 1.0);
            break;
        }
        acc += m;
    }
    let max_width = fraction * median;
    let mut out = Vec::new();
    for (&(a, b), &m) in panels.iter().zip(&masses) {
        let parts = if max_width > 0.0 && m.abs() > 1e-12 {
            ((b - a) / max_width).ceil().max(1.0) as usize
        } else {
            1
        };
        let step = (b - a) / parts as f64;
        for i in 0..parts {
            let hi = if i + 1 == parts { b } else { a + (i + 1) as f64 * step };
            out.push((a + i as f64 * step, hi));
        }
    }
    out
}

#[derive(Debug, Clone)]
struct Node {
    weight: f64,
    link: LinkBudget,
}

#[derive(Debug, Clone)]
struct TierNodes {
    tier: usize,
    probability: f64,
    nodes: Vec<Node>,
}

/// Precomputed links for repeated capacity queries on one scenario.
///
/// Under BARSS each tier carries an adaptive Kronrod rule over the serving
/// distance built from `f_k`, with the link statistics evaluated once per
/// node.
#[derive(Debug, Clone)]
pub struct CapacityAnalysis {
    scenario: NetworkScenario,
    settings: AnalysisSettings,
    groups: Vec<TierNodes>,
    barss: bool,
}

impl CapacityAnalysis {
    pub fn new(scenario: &NetworkScenario, policy: &Policy, settings: AnalysisSettings) -> Result<Self> {
        match policy {
            Policy::Barss => Self::barss(scenario, settings),
            Policy::Generic {
                tier,
                distance,
                exclusion,
            } => Self::generic(scenario, *tier, *distance, exclusion, settings),
        }
    }

    pub fn generic(
        scenario: &NetworkScenario,
        k: usize,
        r: f64,
        excl: &ExclusionProfile,
        settings: AnalysisSettings,
    ) -> Result<Self> {
        scenario.validate()?;
        if k >= scenario.num_tiers() {
            return Err(Error::InvalidConfig(format!("tier {k} does not exist")));
        }
        if !(r >= 0.0) {
            return Err(Error::InvalidConfig("serving distance must be non-negative".into()));
        }
        let link = LinkBudget::new(scenario, k, r, excl, settings.xi_scale)?;
        Ok(Self {
            scenario: scenario.clone(),
            settings,
            groups: vec![TierNodes {
                tier: k,
                probability: 1.0,
                nodes: vec![Node { weight: 1.0, link }],
            }],
            barss: false,
        })
    }

    pub fn barss(scenario: &NetworkScenario, settings: AnalysisSettings) -> Result<Self> {
        let assoc = Association::new(scenario)?;
        let mut groups = Vec::new();
        for k in 0..scenario.num_tiers() {
            let p = assoc.p_star()[k];
            if !(p > 1e-300) {
                continue;
            }
            let f = |u: f64| association_integrand(scenario, k, u) / p;
            let (panels, _) =
                semi_infinite_panels(f, 0.0, &assoc.breakpoints(k), &settings.distance_spec).in_tier(k)?;
            let rule = QuadratureRule::from_panels(refine_panels(&panels, f, settings.distance_panel_fraction));
            let mass = rule.apply(f);
            if (mass - 1.0).abs() > 1e-6 {
                return Err(Error::Tier {
                    tier: k,
                    source: NumericsError::NonConvergent {
                        lower: 0.0,
                        upper: f64::INFINITY,
                        estimate: mass,
                        error: (mass - 1.0).abs(),
                    },
                });
            }
            let nodes = rule
                .nodes
                .par_iter()
                .zip(rule.weights.par_iter())
                .map(|(&r, &w)| -> Result<Option<Node>> {
                    let weight = w * f(r);
                    if weight == 0.0 {
                        return Ok(None);
                    }
                    let link = LinkBudget::new(scenario, k, r, &barss_exclusion(scenario, k, r), settings.xi_scale)?;
                    Ok(Some(Node { weight, link }))
                })
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .flatten()
                .collect();
            groups.push(TierNodes {
                tier: k,
                probability: p,
                nodes,
            });
        }
        Ok(Self {
            scenario: scenario.clone(),
            settings,
            groups,
            barss: true,
        })
    }

    pub fn scenario(&self) -> &NetworkScenario {
        &self.scenario
    }

    /// Number of cached links.
    pub fn num_links(&self) -> usize {
        self.groups.iter().map(|g| g.nodes.len()).sum()
    }

    fn group(&self, k: usize) -> Result<&TierNodes> {
        self.groups
            .iter()
            .find(|g| g.tier == k)
            .ok_or(Error::ZeroProbabilityTier { tier: k })
    }

    fn success(&self, g: &TierNodes, tau: f64, bound: Bound) -> Result<f64> {
        let spec = &self.settings.fading_spec;
        let terms = g
            .nodes
            .par_iter()
            .map(|n| n.link.expected_kernel(tau, bound, spec).map(|v| n.weight * v))
            .collect::<std::result::Result<Vec<_>, _>>()
            .in_tier(g.tier)?;
        Ok(terms.iter().sum::<f64>().clamp(0.0, 1.0))
    }

    /// `(1 − E[V⁺], 1 − E[V⁻])` at rate `tau`, averaged over association.
    pub fn outage_bounds(&self, tau: f64) -> Result<(f64, f64)> {
        let mut hi = 0.0;
        let mut lo = 0.0;
        for g in &self.groups {
            hi += g.probability * self.success(g, tau, Bound::Upper)?;
            lo += g.probability * self.success(g, tau, Bound::Lower)?;
        }
        Ok(((1.0 - hi).clamp(0.0, 1.0), (1.0 - lo).clamp(0.0, 1.0)))
    }

    /// Outage bounds given service from tier `k`.
    pub fn conditional_outage_bounds(&self, k: usize, tau: f64) -> Result<(f64, f64)> {
        let g = self.group(k)?;
        Ok((
            1.0 - self.success(g, tau, Bound::Upper)?,
            1.0 - self.success(g, tau, Bound::Lower)?,
        ))
    }

    fn capacity<F: Fn(f64) -> Result<f64>>(&self, outage: F, gamma: f64) -> Result<f64> {
        let mut failure = None;
        let result = sup_threshold(
            |tau| match outage(tau) {
                Ok(v) => Ok(v),
                Err(e) => {
                    failure.get_or_insert(e);
                    Err(NumericsError::NonFinite { at: tau })
                }
            },
            gamma,
            &self.settings.search,
        );
        match (failure, result) {
            (Some(e), _) => Err(e),
            (None, r) => Ok(r?),
        }
    }

    fn check_gamma(gamma: f64) -> Result<()> {
        if gamma > 0.0 && gamma < 1.0 {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("target outage must lie in (0, 1), got {gamma}")))
        }
    }

    /// Largest rate whose outage bound stays below `gamma`.
    pub fn outage_capacity_band(&self, gamma: f64) -> Result<CapacityBand> {
        Self::check_gamma(gamma)?;
        let lower = self.capacity(|t| self.outage_bounds(t).map(|b| b.1), gamma)?;
        let upper = self.capacity(|t| self.outage_bounds(t).map(|b| b.0), gamma)?;
        Ok(CapacityBand::new(lower, upper))
    }

    /// Outage capacity band given service from tier `k`.
    pub fn conditional_capacity_band(&self, k: usize, gamma: f64) -> Result<CapacityBand> {
        Self::check_gamma(gamma)?;
        let g = self.group(k)?;
        let lower = self.capacity(|t| Ok(1.0 - self.success(g, t, Bound::Lower)?), gamma)?;
        let upper = self.capacity(|t| Ok(1.0 - self.success(g, t, Bound::Upper)?), gamma)?;
        Ok(CapacityBand::new(lower, upper))
    }

    /// Bounds on `E[log(1 + SINR)]` in nats/s/Hz.
    pub fn ergodic_capacity_band(&self) -> Result<CapacityBand> {
        let mut lower = 0.0;
        let mut upper = 0.0;
        let (fs, rs) = (&self.settings.fading_spec, &self.settings.rate_spec);
        for g in &self.groups {
            let weights = RateWeight::new(self.scenario.tiers[g.tier].fading, fs).in_tier(g.tier)?;
            let fs = &weights;
            let terms = g
                .nodes
                .par_iter()
                .map(|n| {
                    let lo = n.link.ergodic(Bound::Lower, fs, rs)?;
                    let hi = n.link.ergodic(Bound::Upper, fs, rs)?;
                    Ok((n.weight * lo, n.weight * hi))
                })
                .collect::<std::result::Result<Vec<_>, NumericsError>>()
                .in_tier(g.tier)?;
            lower += g.probability * terms.iter().map(|t| t.0).sum::<f64>();
            upper += g.probability * terms.iter().map(|t| t.1).sum::<f64>();
        }
        Ok(CapacityBand::new(lower, upper.max(lower)))
    }

    /// `Σ_k λ_k (1 − γ_k) C_o(k, γ_k)` in nats/s/Hz/area.
    pub fn ase_band(&self, gammas: &[f64]) -> Result<CapacityBand> {
        let s = &self.scenario;
        if !self.barss {
            return Err(Error::InvalidConfig("area spectral efficiency needs BARSS association".into()));
        }
        if let Some(k) = s.tiers.iter().position(|t| !t.density.is_homogeneous()) {
            return Err(Error::NonHomogeneousDensity { tier: k });
        }
        if gammas.len() != s.num_tiers() {
            return Err(Error::InvalidConfig(format!(
                "{} outage targets for {} tiers",
                gammas.len(),
                s.num_tiers()
            )));
        }
        let mut lower = 0.0;
        let mut upper = 0.0;
        for (k, &gamma) in gammas.iter().enumerate() {
            let band = self.conditional_capacity_band(k, gamma)?;
            let scale = s.lambda(k) * (1.0 - gamma);
            lower += scale * band.lower;
            upper += scale * band.upper;
        }
        Ok(CapacityBand::new(lower, upper))
    }
}

/// Outage bounds for service from tier `k` at distance `r`.
pub fn outage_bounds_generic(
    scenario: &NetworkScenario,
    k: usize,
    r: f64,
    excl: &ExclusionProfile,
    tau: f64,
) -> Result<(f64, f64)> {
    CapacityAnalysis::generic(scenario, k, r, excl, AnalysisSettings::default())?.outage_bounds(tau)
}

/// Outage bounds under BARSS association.
pub fn outage_bounds_barss(scenario: &NetworkScenario, tau: f64) -> Result<(f64, f64)> {
    CapacityAnalysis::barss(scenario, AnalysisSettings::default())?.outage_bounds(tau)
}

pub fn outage_capacity_band(scenario: &NetworkScenario, gamma: f64, policy: &Policy) -> Result<CapacityBand> {
    CapacityAnalysis::new(scenario, policy, AnalysisSettings::default())?.outage_capacity_band(gamma)
}

pub fn ergodic_capacity_band(scenario: &NetworkScenario, policy: &Policy) -> Result<CapacityBand> {
    CapacityAnalysis::new(scenario, policy, AnalysisSettings::default())?.ergodic_capacity_band()
}

pub fn ase_band(scenario: &NetworkScenario, gammas: &[f64]) -> Result<CapacityBand> {
    CapacityAnalysis::barss(scenario, AnalysisSettings::default())?.ase_band(gammas)
}
