//! Radial densities, tier and scenario configuration, mean measures,
//! nearest-distance laws and distance samplers around the origin.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, NumericsError, Result};
use crate::numerics::{integrate_semi_infinite_with_breaks, integrate_with_breaks, QuadratureSpec};
use crate::propagation::{FadingModel, PathLossModel};

/// Radial density `μ(t)` of a tier's distance process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadialDensity {
    /// `μ(t) = 2πt`.
    Homogeneous,
    /// `μ(t) = 2πt · 1{t ≥ radius}`.
    GuardZone { radius: f64 },
    /// `μ(t) = 2πt · 1{t < inner or t > outer}`.
    AnnulusExcluded { inner: f64, outer: f64 },
    /// Piecewise-linear `μ` through `(t_i, μ_i)`, continued as `μ_n t / t_n`.
    CustomTable { t: Vec<f64>, mu: Vec<f64> },
}

impl RadialDensity {
    pub fn validate(&self) -> Result<()> {
        match self {
            RadialDensity::Homogeneous => Ok(()),
            RadialDensity::GuardZone { radius } => {
                if *radius >= 0.0 && radius.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidConfig(format!("guard-zone radius must be finite and non-negative, got {radius}")))
                }
            }
            RadialDensity::AnnulusExcluded { inner, outer } => {
                if *inner >= 0.0 && outer > inner && outer.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidConfig(format!("annulus needs 0 ≤ inner < outer < ∞, got ({inner}, {outer})")))
                }
            }
            RadialDensity::CustomTable { t, mu } => {
                if t.len() < 2 || t.len() != mu.len() {
                    return Err(Error::InvalidConfig("custom density needs at least two (t, μ) pairs".into()));
                }
                if t[0] != 0.0 || t.windows(2).any(|w| !(w[1] > w[0])) || t.iter().any(|x| !x.is_finite()) {
                    return Err(Error::InvalidConfig("custom density grid must start at 0 and increase strictly".into()));
                }
                if mu.iter().any(|m| !(*m >= 0.0) || !m.is_finite()) {
                    return Err(Error::InvalidConfig("custom density values must be finite and non-negative".into()));
                }
                if !(mu[mu.len() - 1] > 0.0) {
                    // A vanishing tail would leave only finitely many base stations.
                    return Err(Error::InvalidConfig(
                        "custom density must be positive at its last node (infinite base-station population)".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    /// `μ(t)`.
    pub fn mu(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        match self {
            RadialDensity::Homogeneous => 2.0 * PI * t,
            RadialDensity::GuardZone { radius } => {
                if t >= *radius {
                    2.0 * PI * t
                } else {
                    0.0
                }
            }
            RadialDensity::AnnulusExcluded { inner, outer } => {
                if t < *inner || t > *outer {
                    2.0 * PI * t
                } else {
                    0.0
                }
            }
            RadialDensity::CustomTable { t: ts, mu } => {
                let n = ts.len();
                if t >= ts[n - 1] {
                    return mu[n - 1] * t / ts[n - 1];
                }
                let j = ts.partition_point(|&x| x <= t).saturating_sub(1);
                let w = (t - ts[j]) / (ts[j + 1] - ts[j]);
                mu[j] + w * (mu[j + 1] - mu[j])
            }
        }
    }

    /// `∫₀^r μ(t) dt`.
    pub fn cumulative(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        match self {
            RadialDensity::Homogeneous => PI * r * r,
            RadialDensity::GuardZone { radius } => {
                if r > *radius {
                    PI * (r * r - radius * radius)
                } else {
                    0.0
                }
            }
            RadialDensity::AnnulusExcluded { inner, outer } => {
                let near = r.min(*inner);
                let far = if r > *outer { r * r - outer * outer } else { 0.0 };
                PI * (near * near + far)
            }
            RadialDensity::CustomTable { t, mu } => {
                let mut acc = 0.0;
                for j in 0..t.len() - 1 {
                    let (a, b) = (t[j], t[j + 1]);
                    if r <= a {
                        return acc;
                    }
                    let e = r.min(b);
                    let slope = (mu[j + 1] - mu[j]) / (b - a);
                    let d = e - a;
                    acc += mu[j] * d + 0.5 * slope * d * d;
                }
                let n = t.len();
                let tl = t[n - 1];
                if r > tl {
                    acc += 0.5 * mu[n - 1] / tl * (r * r - tl * tl);
                }
                acc
            }
        }
    }

    /// Smallest `r` with `cumulative(r) = m`.
    pub fn cumulative_inverse(&self, m: f64) -> f64 {
        if m <= 0.0 {
            return match self {
                RadialDensity::GuardZone { radius } => *radius,
                _ => 0.0,
            };
        }
        match self {
            RadialDensity::Homogeneous => (m / PI).sqrt(),
            RadialDensity::GuardZone { radius } => (m / PI + radius * radius).sqrt(),
            RadialDensity::AnnulusExcluded { inner, outer } => {
                let near = PI * inner * inner;
                if m <= near {
                    (m / PI).sqrt()
                } else {
                    ((m - near) / PI + outer * outer).sqrt()
                }
            }
            RadialDensity::CustomTable { .. } => {
                let mut lo = 0.0;
                let mut hi = 1.0;
                while self.cumulative(hi) < m {
                    lo = hi;
                    hi *= 2.0;
                }
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if self.cumulative(mid) < m {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo <= 1e-14 * hi.max(1.0) {
                        break;
                    }
                }
                hi
            }
        }
    }

    /// Intervals where `μ > 0` may hold; the last one is unbounded.
    pub fn support(&self) -> Vec<(f64, f64)> {
        match self {
            RadialDensity::Homogeneous | RadialDensity::CustomTable { .. } => vec![(0.0, f64::INFINITY)],
            RadialDensity::GuardZone { radius } => vec![(*radius, f64::INFINITY)],
            RadialDensity::AnnulusExcluded { inner, outer } => {
                if *inner > 0.0 {
                    vec![(0.0, *inner), (*outer, f64::INFINITY)]
                } else {
                    vec![(*outer, f64::INFINITY)]
                }
            }
        }
    }

    /// Points where `μ` is not smooth.
    pub fn kinks(&self) -> Vec<f64> {
        match self {
            RadialDensity::Homogeneous => vec![],
            RadialDensity::GuardZone { radius } => vec![*radius],
            RadialDensity::AnnulusExcluded { inner, outer } => vec![*inner, *outer],
            RadialDensity::CustomTable { t, .. } => t[1..].to_vec(),
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        matches!(self, RadialDensity::Homogeneous)
    }

    /// `∫_{lower}^∞ f(t) μ(t) dt`, split over the support and at `breaks`.
    pub fn integrate<F: Fn(f64) -> f64>(
        &self,
        f: F,
        lower: f64,
        breaks: &[f64],
        spec: &QuadratureSpec,
    ) -> std::result::Result<f64, NumericsError> {
        let g = |t: f64| f(t) * self.mu(t);
        let mut inner_breaks = self.kinks();
        inner_breaks.extend_from_slice(breaks);
        let mut total = 0.0;
        for (a, b) in self.support() {
            let a = a.max(lower);
            if b.is_finite() {
                if b > a {
                    total += integrate_with_breaks(g, a, b, &inner_breaks, spec)?;
                }
            } else if a.is_finite() {
                total += integrate_semi_infinite_with_breaks(g, a, &inner_breaks, spec)?;
            }
        }
        Ok(total)
    }
}

fn default_one() -> f64 {
    1.0
}

fn default_true() -> bool {
    true
}

/// One class of base stations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TierConfig {
    pub power: f64,
    #[serde(default = "default_one")]
    pub bias: f64,
    /// Intensity `λ`; multiplied by the scenario's `κ` when `kappa_scaled`.
    pub intensity: f64,
    #[serde(default = "default_true")]
    pub kappa_scaled: bool,
    pub pathloss: PathLossModel,
    pub fading: FadingModel,
    #[serde(default = "default_density")]
    pub density: RadialDensity,
}

fn default_density() -> RadialDensity {
    RadialDensity::Homogeneous
}

impl TierConfig {
    pub fn new(power: f64, intensity: f64, pathloss: PathLossModel, fading: FadingModel) -> Self {
        Self {
            power,
            bias: 1.0,
            intensity,
            kappa_scaled: true,
            pathloss,
            fading,
            density: RadialDensity::Homogeneous,
        }
    }

    pub fn with_bias(mut self, bias: f64) -> Self {
        self.bias = bias;
        self
    }

    pub fn with_density(mut self, density: RadialDensity) -> Self {
        self.density = density;
        self
    }

    pub fn with_kappa_scaled(mut self, scaled: bool) -> Self {
        self.kappa_scaled = scaled;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("power", self.power), ("bias", self.bias), ("intensity", self.intensity)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidConfig(format!("tier {name} must be positive and finite, got {v}")));
            }
        }
        self.pathloss.validate()?;
        self.fading.validate()?;
        self.density.validate()?;
        // Every supported density grows like t, so μ = O(t^{α-1-ε}) needs α > 2.
        if !(self.pathloss.decay_exponent() > 2.0) {
            return Err(Error::InvalidConfig(
                "path loss must decay faster than t^-2 against a density growing like t".into(),
            ));
        }
        Ok(())
    }

    /// Biased transmit power `β P`.
    pub fn biased_power(&self) -> f64 {
        self.bias * self.power
    }
}

fn default_kappa() -> f64 {
    1.0
}

/// A full K-tier network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkScenario {
    pub tiers: Vec<TierConfig>,
    #[serde(default)]
    pub noise: f64,
    #[serde(default = "default_one")]
    pub processing_gain: f64,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
}

impl NetworkScenario {
    pub fn new(tiers: Vec<TierConfig>) -> Self {
        Self {
            tiers,
            noise: 0.0,
            processing_gain: 1.0,
            kappa: 1.0,
        }
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn with_noise(mut self, noise: f64) -> Self {
        self.noise = noise;
        self
    }

    pub fn with_processing_gain(mut self, pg: f64) -> Self {
        self.processing_gain = pg;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.tiers.is_empty() {
            return Err(Error::InvalidConfig("scenario needs at least one tier".into()));
        }
        if !(self.noise >= 0.0) || !self.noise.is_finite() {
            return Err(Error::InvalidConfig(format!("noise power must be non-negative, got {}", self.noise)));
        }
        if !(self.processing_gain >= 1.0) || !self.processing_gain.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "processing gain must be at least 1, got {}",
                self.processing_gain
            )));
        }
        if !(self.kappa > 0.0) || !self.kappa.is_finite() {
            return Err(Error::InvalidConfig(format!("kappa must be positive, got {}", self.kappa)));
        }
        for (k, tier) in self.tiers.iter().enumerate() {
            tier.validate().map_err(|e| match e {
                Error::InvalidConfig(msg) => Error::InvalidConfig(format!("tier {k}: {msg}")),
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn num_tiers(&self) -> usize {
        self.tiers.len()
    }

    /// Effective intensity of tier `k` after applying `κ`.
    pub fn lambda(&self, k: usize) -> f64 {
        let t = &self.tiers[k];
        if t.kappa_scaled {
            t.intensity * self.kappa
        } else {
            t.intensity
        }
    }

    /// Tier `k` with `κ` folded into its intensity.
    pub fn effective_tier(&self, k: usize) -> TierConfig {
        let mut t = self.tiers[k].clone();
        t.intensity = self.lambda(k);
        t.kappa_scaled = false;
        t
    }

    /// Same network with `κ` folded into every intensity and `κ = 1`.
    pub fn resolved(&self) -> NetworkScenario {
        NetworkScenario {
            tiers: (0..self.num_tiers()).map(|k| self.effective_tier(k)).collect(),
            noise: self.noise,
            processing_gain: self.processing_gain,
            kappa: 1.0,
        }
    }

    pub fn all_homogeneous(&self) -> bool {
        self.tiers.iter().all(|t| t.density.is_homogeneous())
    }
}

/// `Λ(B(0, r)) = λ ∫₀^r μ(t) dt`.
pub fn mean_measure(tier: &TierConfig, r: f64) -> f64 {
    tier.intensity * tier.density.cumulative(r)
}

/// `P(no base station of the tier within r)`.
pub fn void_probability(tier: &TierConfig, r: f64) -> f64 {
    (-mean_measure(tier, r)).exp()
}

/// Density of the nearest tier distance, `λ μ(u) e^{-Λ(B(0,u))}`.
pub fn nearest_distance_pdf(tier: &TierConfig, u: f64) -> f64 {
    if u < 0.0 {
        return 0.0;
    }
    let m = tier.intensity * tier.density.mu(u);
    if m == 0.0 {
        return 0.0;
    }
    m * (-mean_measure(tier, u)).exp()
}

pub fn nearest_distance_cdf(tier: &TierConfig, u: f64) -> f64 {
    -(-mean_measure(tier, u)).exp_m1()
}

/// Radius enclosing `m` expected base stations.
pub fn radius_for_mean(tier: &TierConfig, m: f64) -> f64 {
    tier.density.cumulative_inverse(m / tier.intensity)
}

/// Nearest distance by inversion of the void probability.
pub fn sample_nearest_distance<R: Rng + ?Sized>(tier: &TierConfig, rng: &mut R) -> f64 {
    let e: f64 = Exp1.sample(rng);
    radius_for_mean(tier, e)
}

/// Distances of all base stations in `[0, r_max]`.
pub fn sample_distances<R: Rng + ?Sized>(tier: &TierConfig, r_max: f64, rng: &mut R) -> Vec<f64> {
    let mut out = Vec::new();
    sample_distances_between(tier, 0.0, r_max, rng, &mut out);
    out
}

/// Appends the distances of all base stations in `(r_min, r_max]` to `out`.
pub fn sample_distances_between<R: Rng + ?Sized>(
    tier: &TierConfig,
    r_min: f64,
    r_max: f64,
    rng: &mut R,
    out: &mut Vec<f64>,
) {
    if !(r_max > r_min) {
        return;
    }
    let c0 = tier.density.cumulative(r_min);
    let c1 = tier.density.cumulative(r_max);
    let mean = tier.intensity * (c1 - c0);
    if !(mean > 0.0) {
        return;
    }
    let n = Poisson::new(mean).expect("positive Poisson mean").sample(rng) as usize;
    out.reserve(n);
    match &tier.density {
        RadialDensity::Homogeneous => {
            let (a2, b2) = (r_min * r_min, r_max * r_max);
            for _ in 0..n {
                let u: f64 = rng.random();
                out.push((a2 + u * (b2 - a2)).sqrt());
            }
        }
        density => {
            for _ in 0..n {
                let u: f64 = rng.random();
                out.push(density.cumulative_inverse(c0 + u * (c1 - c0)));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tier(density: RadialDensity, lambda: f64) -> TierConfig {
        TierConfig::new(1.0, lambda, PathLossModel::BoundedPowerLaw { alpha: 3.0 }, FadingModel::Rayleigh)
            .with_density(density)
    }

    fn custom() -> RadialDensity {
        RadialDensity::CustomTable {
            t: vec![0.0, 1.0, 2.0, 4.0],
            mu: vec![0.0, 3.0, 1.0, 6.0],
        }
    }

    #[test]
    fn mean_measure_examples() {
        assert!((mean_measure(&tier(RadialDensity::Homogeneous, 1.0), 1.0) - PI).abs() < 1e-15);
        assert_eq!(mean_measure(&tier(RadialDensity::GuardZone { radius: 5.0 }, 1.0), 5.0), 0.0);
        let a = tier(RadialDensity::AnnulusExcluded { inner: 2.0, outer: 20.0 }, 1.0);
        assert!((mean_measure(&a, 10.0) - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn nearest_pdf_examples() {
        let t = tier(RadialDensity::Homogeneous, 0.7);
        let u = 0.9;
        let want = 2.0 * PI * 0.7 * u * (-PI * 0.7 * u * u).exp();
        assert!((nearest_distance_pdf(&t, u) - want).abs() < 1e-15);
        let g = tier(RadialDensity::GuardZone { radius: 5.0 }, 1.0);
        assert_eq!(nearest_distance_pdf(&g, 4.99), 0.0);
    }

    #[test]
    fn nearest_pdf_normalized_for_every_variant() {
        let spec = QuadratureSpec::default();
        for d in [
            RadialDensity::Homogeneous,
            RadialDensity::GuardZone { radius: 5.0 },
            RadialDensity::AnnulusExcluded { inner: 2.0, outer: 20.0 },
            RadialDensity::AnnulusExcluded { inner: 0.3, outer: 1.0 },
            custom(),
        ] {
            let t = tier(d.clone(), 0.4);
            let mut breaks = d.kinks();
            breaks.push(0.0);
            let total = integrate_semi_infinite_with_breaks(|u| nearest_distance_pdf(&t, u), 0.0, &breaks, &spec).unwrap();
            assert!((total - 1.0).abs() < 1e-6, "{d:?}: {total}");
        }
    }

    #[test]
    fn cumulative_matches_quadrature_and_inverse() {
        let spec = QuadratureSpec::default();
        for d in [
            RadialDensity::Homogeneous,
            RadialDensity::GuardZone { radius: 1.5 },
            RadialDensity::AnnulusExcluded { inner: 1.0, outer: 2.5 },
            custom(),
        ] {
            let mut prev = 0.0;
            for i in 1..=60 {
                let r = 0.1 * f64::from(i);
                let c = d.cumulative(r);
                let q = integrate_with_breaks(|t| d.mu(t), 0.0, r, &d.kinks(), &spec).unwrap();
                assert!((c - q).abs() < 1e-9 * c.max(1.0), "{d:?} r={r}");
                assert!(c >= prev);
                prev = c;
                if d.mu(r) > 0.0 {
                    assert!((d.cumulative_inverse(c) - r).abs() < 1e-9, "{d:?} r={r}");
                }
            }
        }
    }

    #[test]
    fn custom_density_rejects_finite_mass() {
        let d = RadialDensity::CustomTable {
            t: vec![0.0, 1.0],
            mu: vec![1.0, 0.0],
        };
        assert!(d.validate().is_err());
    }

    #[test]
    fn sampled_counts_and_radial_law() {
        let t = tier(RadialDensity::Homogeneous, 1.0);
        let mut total = 0usize;
        let mut pooled = Vec::new();
        for i in 0..10_000u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            rng.set_stream(i);
            let d = sample_distances(&t, 10.0, &mut rng);
            total += d.len();
            if pooled.len() < 10_000 {
                pooled.extend(d.into_iter().take(1));
            }
        }
        let mean = total as f64 / 10_000.0;
        assert!((mean / (100.0 * PI) - 1.0).abs() < 0.03);
        pooled.sort_by(f64::total_cmp);
        let n = pooled.len() as f64;
        let ks = pooled
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = x * x / 100.0;
                (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks < 0.02, "{ks}");
    }

    #[test]
    fn guard_zone_window_is_empty() {
        let t = tier(RadialDensity::GuardZone { radius: 5.0 }, 3.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            assert!(sample_distances(&t, 5.0, &mut rng).is_empty());
        }
    }

    #[test]
    fn effective_intensity_respects_kappa_flag() {
        let pl = PathLossModel::BoundedPowerLaw { alpha: 3.0 };
        let s = NetworkScenario::new(vec![
            TierConfig::new(1.0, 0.1, pl.clone(), FadingModel::Rayleigh).with_kappa_scaled(false),
            TierConfig::new(1.0, 1.0, pl, FadingModel::Rayleigh),
        ])
        .with_kappa(7.0);
        assert_eq!(s.lambda(0), 0.1);
        assert_eq!(s.lambda(1), 7.0);
        s.validate().unwrap();
    }
}
