//! Interference moments, the Berry–Esseen coefficient `Ξ`, the weight `c(x)`
//! and the Gaussian CDF band for standardized aggregate interference.

use std::f64::consts::PI;

use crate::error::{Error, NumericsError, Result, TierContext};
use crate::numerics::{integrate_semi_infinite_with_breaks, std_normal_cdf, QuadratureSpec};
use crate::propagation::{FadingModel, PathLossModel};
use crate::spatial::{NetworkScenario, TierConfig};

/// Uniform Berry–Esseen constant.
pub const BE_UNIFORM: f64 = 0.4785;
/// Non-uniform Berry–Esseen constant.
pub const BE_NON_UNIFORM: f64 = 31.935;

/// Quadrature used for moment integrals.
pub const MOMENT_SPEC: QuadratureSpec = QuadratureSpec {
    relative_tolerance: 1e-12,
    absolute_floor: 1e-300,
    max_subdivisions: 2000,
};

/// Where the uniform and non-uniform branches of `c(x)` meet.
pub fn berry_esseen_crossover() -> f64 {
    (BE_NON_UNIFORM / BE_UNIFORM - 1.0).cbrt()
}

/// `c(x) = min(0.4785, 31.935 / (1 + |x|³))`.
pub fn berry_esseen_c(x: f64) -> f64 {
    let a = x.abs();
    BE_UNIFORM.min(BE_NON_UNIFORM / (1.0 + a * a * a))
}

/// Per-tier lower integration limits.
#[derive(Debug, Clone, PartialEq)]
pub struct ExclusionProfile {
    pub radii: Vec<f64>,
    pub kind: ExclusionKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExclusionKind {
    None,
    Generic,
    Barss { tier: usize, distance: f64 },
}

impl ExclusionProfile {
    pub fn none(k: usize) -> Self {
        Self {
            radii: vec![0.0; k],
            kind: ExclusionKind::None,
        }
    }

    pub fn generic(radii: Vec<f64>) -> Self {
        Self {
            radii,
            kind: ExclusionKind::Generic,
        }
    }

    pub fn barss(tier: usize, distance: f64, radii: Vec<f64>) -> Self {
        Self {
            radii,
            kind: ExclusionKind::Barss { tier, distance },
        }
    }

    fn check(&self, k: usize) -> Result<()> {
        if self.radii.len() != k {
            return Err(Error::InvalidConfig(format!(
                "exclusion profile has {} radii for {k} tiers",
                self.radii.len()
            )));
        }
        if self.radii.iter().any(|d| !(*d >= 0.0)) {
            return Err(Error::InvalidConfig("exclusion radii must be non-negative".into()));
        }
        Ok(())
    }
}

/// Mean, variance and Berry–Esseen coefficient of the interference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianSummary {
    pub mean: f64,
    pub variance: f64,
    pub xi: f64,
}

impl GaussianSummary {
    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// `∫_{lower}^∞ G^n(t) μ(t) dt`.
pub fn pathloss_integral(tier: &TierConfig, n: u32, lower: f64) -> std::result::Result<f64, NumericsError> {
    if lower == f64::INFINITY {
        return Ok(0.0);
    }
    let pl = &tier.pathloss;
    tier.density
        .integrate(|t| pl.gain(t).powi(n as i32), lower, pl.kinks(), &MOMENT_SPEC)
}

/// `λ Pⁿ E[Hⁿ] ∫_{lower}^∞ Gⁿ μ`, using the tier's own intensity.
pub fn moment_integral(tier: &TierConfig, n: u32, lower: f64) -> Result<f64> {
    let base = pathloss_integral(tier, n, lower)?;
    Ok(tier.intensity * tier.power.powi(n as i32) * tier.fading.moment(n) * base)
}

fn per_tier_moments(scenario: &NetworkScenario, excl: &ExclusionProfile, orders: &[u32]) -> Result<Vec<Vec<f64>>> {
    excl.check(scenario.num_tiers())?;
    (0..scenario.num_tiers())
        .map(|k| {
            let tier = scenario.effective_tier(k);
            orders
                .iter()
                .map(|&n| {
                    let base = pathloss_integral(&tier, n, excl.radii[k]).in_tier(k)?;
                    Ok(tier.intensity * tier.power.powi(n as i32) * tier.fading.moment(n) * base)
                })
                .collect()
        })
        .collect()
}

/// Campbell mean and variance of the interference.
pub fn interference_moments(scenario: &NetworkScenario, excl: &ExclusionProfile) -> Result<(f64, f64)> {
    let m = per_tier_moments(scenario, excl, &[1, 2])?;
    Ok((m.iter().map(|v| v[0]).sum(), m.iter().map(|v| v[1]).sum()))
}

/// Mean, variance and `Ξ` in one pass.
pub fn gaussian_summary(scenario: &NetworkScenario, excl: &ExclusionProfile) -> Result<GaussianSummary> {
    let m = per_tier_moments(scenario, excl, &[1, 2, 3])?;
    let mean: f64 = m.iter().map(|v| v[0]).sum();
    let variance: f64 = m.iter().map(|v| v[1]).sum();
    let third: f64 = m.iter().map(|v| v[2]).sum();
    let denom = variance.powf(1.5);
    if !(denom > 1e-300) {
        return Err(Error::DegenerateVariance);
    }
    Ok(GaussianSummary {
        mean,
        variance,
        xi: third / denom,
    })
}

/// `Ξ = Σ λ P³ m₃ ∫G³μ / (Σ λ P² m₂ ∫G²μ)^{3/2}` with per-tier lower limits.
pub fn xi_coefficient(scenario: &NetworkScenario, excl: &ExclusionProfile) -> Result<f64> {
    gaussian_summary(scenario, excl).map(|s| s.xi)
}

/// `(max(0, Ψ(x) − Ξc(x)), min(1, Ψ(x) + Ξc(x)))`.
pub fn cdf_band(x: f64, summary: &GaussianSummary) -> (f64, f64) {
    band_at(x, summary.xi)
}

pub(crate) fn band_at(x: f64, xi: f64) -> (f64, f64) {
    let psi = std_normal_cdf(x);
    let w = xi * berry_esseen_c(x);
    ((psi - w).max(0.0), (psi + w).min(1.0))
}

/// Tightens bands on an ascending grid using monotonicity of the true CDF.
pub fn monotone_envelope(bands: &mut [(f64, f64)]) {
    let mut run = 0.0f64;
    for b in bands.iter_mut() {
        run = run.max(b.0);
        b.0 = run;
    }
    let mut run = 1.0f64;
    for b in bands.iter_mut().rev() {
        run = run.min(b.1);
        b.1 = run;
    }
}

/// Upper bound on `Ξ` with its scale-free constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XiUpperBound {
    /// `‖λ‖₂ ‖a‖₂ / (min_k b_k · Σ_k λ_k)^{3/2}`.
    pub bound: f64,
    /// `bound · √‖λ‖₂`, constant under intensity scaling.
    pub delta: f64,
    pub xi: f64,
}

fn unit_integrals(scenario: &NetworkScenario) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let mut lam = Vec::new();
    let mut i2 = Vec::new();
    let mut i3 = Vec::new();
    for k in 0..scenario.num_tiers() {
        let t = &scenario.tiers[k];
        lam.push(scenario.lambda(k));
        i2.push(pathloss_integral(t, 2, 0.0).in_tier(k)?);
        i3.push(pathloss_integral(t, 3, 0.0).in_tier(k)?);
    }
    Ok((lam, i2, i3))
}

fn norm2(v: impl Iterator<Item = f64>) -> f64 {
    v.map(|x| x * x).sum::<f64>().sqrt()
}

/// Convergence-rate bound `Ξ ≤ δ / √‖λ‖₂` from Cauchy–Schwarz and `‖λ‖₁ ≥ ‖λ‖₂`.
pub fn xi_upper_bound(scenario: &NetworkScenario) -> Result<XiUpperBound> {
    let (lam, i2, i3) = unit_integrals(scenario)?;
    let tiers = &scenario.tiers;
    let a: Vec<f64> = (0..lam.len())
        .map(|k| tiers[k].power.powi(3) * tiers[k].fading.moment(3) * i3[k])
        .collect();
    let b: Vec<f64> = (0..lam.len())
        .map(|k| tiers[k].power.powi(2) * tiers[k].fading.moment(2) * i2[k])
        .collect();
    let lam2 = norm2(lam.iter().copied());
    let lam1: f64 = lam.iter().sum();
    let bmin = b.iter().copied().fold(f64::INFINITY, f64::min);
    let bound = lam2 * norm2(a.iter().copied()) / (bmin * lam1).powf(1.5);
    let num: f64 = (0..lam.len()).map(|k| lam[k] * a[k]).sum();
    let den: f64 = (0..lam.len()).map(|k| lam[k] * b[k]).sum();
    Ok(XiUpperBound {
        bound,
        delta: bound * lam2.sqrt(),
        xi: num / den.powf(1.5),
    })
}

/// Fading lower bound `Ξ ≥ (‖c‖₂‖b‖₂)^{-3/2} Σ a_k c_k^{3/2}`.
pub fn xi_lower_bound(scenario: &NetworkScenario) -> Result<f64> {
    let (lam, i2, i3) = unit_integrals(scenario)?;
    let tiers = &scenario.tiers;
    let a: Vec<f64> = (0..lam.len()).map(|k| lam[k] * i3[k]).collect();
    let b: Vec<f64> = (0..lam.len()).map(|k| lam[k] * i2[k]).collect();
    let c: Vec<f64> = (0..lam.len())
        .map(|k| tiers[k].power.powi(2) * tiers[k].fading.moment(2))
        .collect();
    let scale = (norm2(c.iter().copied()) * norm2(b.iter().copied())).powf(-1.5);
    Ok(scale * (0..lam.len()).map(|k| a[k] * c[k].powf(1.5)).sum::<f64>())
}

/// `∫₀^∞ Gⁿ(t) t dt`.
pub fn planar_integral(pathloss: &PathLossModel, n: u32) -> std::result::Result<f64, NumericsError> {
    integrate_semi_infinite_with_breaks(|t| pathloss.gain(t).powi(n as i32) * t, 0.0, pathloss.kinks(), &MOMENT_SPEC)
}

/// `Ξ` for homogeneous tiers written with planar integrals and a `1/√(2π)` prefactor.
pub fn xi_homogeneous(scenario: &NetworkScenario) -> Result<f64> {
    let mut num = 0.0;
    let mut den = 0.0;
    for k in 0..scenario.num_tiers() {
        let t = &scenario.tiers[k];
        if !t.density.is_homogeneous() {
            return Err(Error::NonHomogeneousDensity { tier: k });
        }
        let lam = scenario.lambda(k);
        num += lam * t.power.powi(3) * t.fading.moment(3) * planar_integral(&t.pathloss, 3).in_tier(k)?;
        den += lam * t.power.powi(2) * t.fading.moment(2) * planar_integral(&t.pathloss, 2).in_tier(k)?;
    }
    Ok(num / den.powf(1.5) / (2.0 * PI).sqrt())
}

/// `Ξ` for `tiers` identical homogeneous tiers of intensity `lambda` each.
pub fn xi_equal_tiers(lambda: f64, tiers: usize, fading: &FadingModel, pathloss: &PathLossModel) -> Result<f64> {
    let j2 = planar_integral(pathloss, 2)?;
    let j3 = planar_integral(pathloss, 3)?;
    Ok(1.0 / (2.0 * PI * tiers as f64 * lambda).sqrt() * fading.moment(3) / fading.moment(2).powf(1.5) * j3
        / j2.powf(1.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spatial::RadialDensity;

    fn fig1(kappa: f64, pathloss: PathLossModel) -> NetworkScenario {
        NetworkScenario::new(vec![
            TierConfig::new(4.0, 0.1, pathloss.clone(), FadingModel::Rayleigh),
            TierConfig::new(1.0, 1.0, pathloss.clone(), FadingModel::Rayleigh),
            TierConfig::new(0.25, 5.0, pathloss, FadingModel::Rayleigh),
        ])
        .with_kappa(kappa)
    }

    const PL3: PathLossModel = PathLossModel::BoundedPowerLaw { alpha: 3.0 };

    #[test]
    fn crossover_constant() {
        let x = berry_esseen_crossover();
        assert!((x - 4.0359).abs() < 1e-3);
        assert!((BE_UNIFORM - BE_NON_UNIFORM / (1.0 + x.powi(3))).abs() < 1e-12);
    }

    #[test]
    fn c_examples() {
        assert_eq!(berry_esseen_c(0.0), 0.4785);
        assert!((berry_esseen_c(10.0) - 31.935 / 1001.0).abs() < 1e-16);
        assert_eq!(berry_esseen_c(-10.0), berry_esseen_c(10.0));
    }

    #[test]
    fn band_examples() {
        let s = GaussianSummary {
            mean: 0.0,
            variance: 1.0,
            xi: 0.1,
        };
        let (lo, hi) = cdf_band(0.0, &s);
        assert!((lo - 0.45215).abs() < 1e-12 && (hi - 0.54785).abs() < 1e-12);
        let z = GaussianSummary { xi: 0.0, ..s };
        let (lo, hi) = cdf_band(1.3, &z);
        assert_eq!(lo, hi);
        let (lo, hi) = cdf_band(20.0, &s);
        assert!((hi - lo) <= 2.0 * 0.1 * 31.935 / 8001.0 + 1e-15);
    }

    #[test]
    fn moment_integral_reference() {
        let t = TierConfig::new(
            1.0,
            1.0,
            PathLossModel::BoundedPowerLaw { alpha: 4.0 },
            FadingModel::Deterministic { h: 1.0 },
        );
        // 2π · π/8
        let v = moment_integral(&t, 2, 0.0).unwrap();
        assert!((v - PI * PI / 4.0).abs() < 1e-11);
        assert_eq!(moment_integral(&t, 2, f64::INFINITY).unwrap(), 0.0);
        let g = t.clone().with_density(RadialDensity::GuardZone { radius: 1.7 });
        let a = moment_integral(&g, 3, 0.0).unwrap();
        let b = moment_integral(&t, 3, 1.7).unwrap();
        assert!((a - b).abs() < 1e-13 * b);
    }

    #[test]
    fn power_law_planar_integrals() {
        // mpmath: ∫ 2πt/(1+t³)^n dt for n = 1, 2, 3
        let t = TierConfig::new(1.0, 1.0, PL3, FadingModel::Deterministic { h: 1.0 });
        let want = [7.597625010352075162, 2.532541670117358387, 1.688361113411572258];
        for (n, w) in (1..=3).zip(want) {
            let v = pathloss_integral(&t, n, 0.0).unwrap();
            assert!((v - w).abs() < 1e-10 * w, "n={n}: {v}");
        }
    }

    #[test]
    fn stretched_exponential_integrals() {
        let t = TierConfig::new(
            1.0,
            1.0,
            PathLossModel::StretchedExponential { alpha: 2.0, beta: 0.5 },
            FadingModel::Deterministic { h: 1.0 },
        );
        let v2 = pathloss_integral(&t, 2, 0.0).unwrap();
        let v3 = pathloss_integral(&t, 3, 0.0).unwrap();
        assert!((v2 - 0.294524311274043116).abs() < 1e-11 * v2);
        assert!((v3 - 0.058177641733144319).abs() < 1e-11 * v3);
    }

    #[test]
    fn fig1_xi_reference() {
        let cases = [
            (1.0, 1.336997259637913184),
            (10.0, 0.422795656585931526),
            (40.0, 0.211397828292965763),
            (100.0, 0.133699725963791318),
        ];
        for (kappa, want) in cases {
            let s = fig1(kappa, PL3);
            let xi = xi_coefficient(&s, &ExclusionProfile::none(3)).unwrap();
            assert!((xi - want).abs() < 1e-10 * want, "κ={kappa}: {xi}");
        }
        let se = fig1(10.0, PathLossModel::StretchedExponential { alpha: 2.0, beta: 0.5 });
        let xi = xi_coefficient(&se, &ExclusionProfile::none(3)).unwrap();
        assert!((xi - 0.367345281159580588).abs() < 1e-10);
    }

    #[test]
    fn fig1_moments_reference() {
        let (m, v) = interference_moments(&fig1(10.0, PL3), &ExclusionProfile::none(3)).unwrap();
        assert!((m - 201.337062774329992).abs() < 1e-9 * m);
        assert!((v - 147.520552284336126).abs() < 1e-9 * v);
    }

    #[test]
    fn scale_law_and_linearity() {
        let a = fig1(10.0, PL3);
        let b = fig1(40.0, PL3);
        let xa = xi_coefficient(&a, &ExclusionProfile::none(3)).unwrap();
        let xb = xi_coefficient(&b, &ExclusionProfile::none(3)).unwrap();
        assert!((xb / xa - 0.5).abs() < 1e-12);
        let (m1, v1) = interference_moments(&a, &ExclusionProfile::none(3)).unwrap();
        let (m2, v2) = interference_moments(&a.clone().with_kappa(20.0), &ExclusionProfile::none(3)).unwrap();
        assert!((m2 / m1 - 2.0).abs() < 1e-12 && (v2 / v1 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn homogeneous_and_equal_tier_paths_agree() {
        let s = fig1(10.0, PL3);
        let general = xi_coefficient(&s, &ExclusionProfile::none(3)).unwrap();
        let planar = xi_homogeneous(&s).unwrap();
        assert!((general - planar).abs() < 1e-10 * general);

        let fading = FadingModel::Nakagami { m: 2.0 };
        let pl = PathLossModel::BoundedPowerLaw { alpha: 3.5 };
        let eq = NetworkScenario::new(vec![TierConfig::new(2.0, 0.3, pl.clone(), fading); 3]);
        let a = xi_coefficient(&eq, &ExclusionProfile::none(3)).unwrap();
        let b = xi_equal_tiers(0.3, 3, &fading, &pl).unwrap();
        assert!((a - b).abs() < 1e-10 * a);
    }

    #[test]
    fn fading_bounds_sandwich() {
        let s = fig1(10.0, PL3);
        let up = xi_upper_bound(&s).unwrap();
        let lo = xi_lower_bound(&s).unwrap();
        assert!(lo < up.xi && up.xi <= up.bound);
        let d: Vec<f64> = [1.0, 10.0, 100.0]
            .iter()
            .map(|&k| xi_upper_bound(&fig1(k, PL3)).unwrap().delta)
            .collect();
        assert!((d[1] / d[0] - 1.0).abs() < 1e-10 && (d[2] / d[0] - 1.0).abs() < 1e-10);

        let det = NetworkScenario::new(vec![TierConfig::new(
            3.0,
            0.7,
            PL3,
            FadingModel::Deterministic { h: 0.8 },
        )]);
        let xi = xi_coefficient(&det, &ExclusionProfile::none(1)).unwrap();
        assert!((xi_lower_bound(&det).unwrap() - xi).abs() < 1e-10 * xi);
    }

    #[test]
    fn envelope_is_monotone() {
        let s = GaussianSummary {
            mean: 0.0,
            variance: 1.0,
            xi: 0.3,
        };
        let mut bands: Vec<(f64, f64)> = (-100..=100).map(|i| cdf_band(0.05 * f64::from(i), &s)).collect();
        let raw = bands.clone();
        monotone_envelope(&mut bands);
        for (i, b) in bands.iter().enumerate() {
            assert!(b.0 >= raw[i].0 && b.1 <= raw[i].1 && b.0 <= b.1);
            if i > 0 {
                assert!(b.0 >= bands[i - 1].0 && b.1 >= bands[i - 1].1);
            }
        }
    }
}
