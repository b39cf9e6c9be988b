//! Biased average received signal strength (BARSS) association: exclusion
//! radii, per-tier association probabilities and conditional serving
//! distance densities.

use std::f64::consts::PI;

use crate::error::{Error, Result, TierContext};
use crate::gaussian::ExclusionProfile;
use crate::numerics::{integrate_semi_infinite, integrate_semi_infinite_with_breaks, integrate_with_breaks, QuadratureSpec};
use crate::spatial::{mean_measure, nearest_distance_pdf, NetworkScenario};

/// Quadrature used for association integrals.
pub const ASSOCIATION_SPEC: QuadratureSpec = QuadratureSpec {
    relative_tolerance: 1e-12,
    absolute_floor: 1e-300,
    max_subdivisions: 4000,
};

/// `Q_i^{(k)}(r) = G_i^{-1}((β_k P_k / β_i P_i) G_k(r))`; exactly `r` when `i = k`.
pub fn exclusion_radius(scenario: &NetworkScenario, k: usize, i: usize, r: f64) -> f64 {
    if i == k {
        return r;
    }
    let (tk, ti) = (&scenario.tiers[k], &scenario.tiers[i]);
    let arg = tk.biased_power() / ti.biased_power() * tk.pathloss.gain(r);
    ti.pathloss.inverse(arg)
}

/// Interferer exclusion radii given service from tier `k` at distance `r`.
pub fn barss_exclusion(scenario: &NetworkScenario, k: usize, r: f64) -> ExclusionProfile {
    let radii = (0..scenario.num_tiers())
        .map(|i| exclusion_radius(scenario, k, i, r))
        .collect();
    ExclusionProfile::barss(k, r, radii)
}

/// `∏_{i≠k} exp(−Λ_i(B(0, Q_i(u)))) · f_{R_k}(u)`.
pub fn association_integrand(scenario: &NetworkScenario, k: usize, u: f64) -> f64 {
    let tk = scenario.effective_tier(k);
    let f = nearest_distance_pdf(&tk, u);
    if f == 0.0 {
        return 0.0;
    }
    let mut exponent = 0.0;
    for i in 0..scenario.num_tiers() {
        if i != k {
            let q = exclusion_radius(scenario, k, i, u);
            if q > 0.0 {
                exponent += mean_measure(&scenario.effective_tier(i), q);
            }
        }
    }
    f * (-exponent).exp()
}

/// Distances where the tier-`k` association integrand may have a kink or jump.
pub fn association_breakpoints(scenario: &NetworkScenario, k: usize) -> Vec<f64> {
    let tk = &scenario.tiers[k];
    let mut out = tk.density.kinks();
    out.extend_from_slice(tk.pathloss.kinks());
    for (i, ti) in scenario.tiers.iter().enumerate() {
        if i == k {
            continue;
        }
        let ratio = ti.biased_power() / tk.biased_power();
        let mut edges = vec![0.0];
        edges.extend(ti.density.kinks());
        edges.extend_from_slice(ti.pathloss.kinks());
        for e in edges {
            let u = tk.pathloss.inverse(ratio * ti.pathloss.gain(e));
            if u.is_finite() && u > 0.0 {
                out.push(u);
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

/// Per-tier `p_k★`; uses the segmented form when every tier is homogeneous.
pub fn association_probability(scenario: &NetworkScenario) -> Result<Vec<f64>> {
    if scenario.all_homogeneous() {
        association_probability_segmented(scenario)
    } else {
        association_probability_general(scenario)
    }
}

/// `p_k★` by integrating the void-product integrand with breakpoints.
pub fn association_probability_general(scenario: &NetworkScenario) -> Result<Vec<f64>> {
    if scenario.num_tiers() == 1 {
        return Ok(vec![1.0]);
    }
    (0..scenario.num_tiers())
        .map(|k| {
            let breaks = association_breakpoints(scenario, k);
            integrate_semi_infinite_with_breaks(|u| association_integrand(scenario, k, u), 0.0, &breaks, &ASSOCIATION_SPEC)
                .in_tier(k)
        })
        .collect()
}

/// `p_k★` by brute adaptive quadrature over `[0, ∞)` without breakpoints.
pub fn association_probability_direct(scenario: &NetworkScenario) -> Result<Vec<f64>> {
    (0..scenario.num_tiers())
        .map(|k| {
            integrate_semi_infinite(|u| association_integrand(scenario, k, u), 0.0, &ASSOCIATION_SPEC).in_tier(k)
        })
        .collect()
}

/// One piece `[start, end)` of the homogeneous decomposition and the tiers
/// whose exclusion disc is non-empty on it.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub active: Vec<usize>,
}

/// Breakpoints `r_j = G_k^{-1}(a_{π(j)})` with `a_i = (β_i P_i / β_k P_k) G_i(0)`
/// sorted descending (ties by index), framed by the `+∞` and `0` sentinels.
pub fn segments(scenario: &NetworkScenario, k: usize) -> Vec<Segment> {
    let tk = &scenario.tiers[k];
    let mut order: Vec<(usize, f64)> = (0..scenario.num_tiers())
        .filter(|&i| i != k)
        .map(|i| {
            let ti = &scenario.tiers[i];
            (i, ti.biased_power() / tk.biased_power() * ti.pathloss.peak())
        })
        .collect();
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut a = vec![f64::INFINITY];
    a.extend(order.iter().map(|x| x.1));
    a.push(0.0);
    let r: Vec<f64> = a.iter().map(|&ai| tk.pathloss.inverse(ai)).collect();
    (1..r.len())
        .map(|j| Segment {
            start: r[j - 1],
            end: r[j],
            active: order[..j - 1].iter().map(|x| x.0).collect(),
        })
        .collect()
}

fn segment_integrand(scenario: &NetworkScenario, k: usize, active: &[usize], u: f64) -> f64 {
    let lk = scenario.lambda(k);
    let mut exponent = lk * u * u;
    for &i in active {
        let q = exclusion_radius(scenario, k, i, u);
        exponent += scenario.lambda(i) * q * q;
    }
    2.0 * PI * lk * u * (-PI * exponent).exp()
}

fn require_homogeneous(scenario: &NetworkScenario) -> Result<()> {
    match scenario.tiers.iter().position(|t| !t.density.is_homogeneous()) {
        Some(tier) => Err(Error::NonHomogeneousDensity { tier }),
        None => Ok(()),
    }
}

/// `p_k★` as a sum of segment integrals; homogeneous tiers only.
pub fn association_probability_segmented(scenario: &NetworkScenario) -> Result<Vec<f64>> {
    require_homogeneous(scenario)?;
    (0..scenario.num_tiers())
        .map(|k| {
            let mut total = 0.0;
            for seg in segments(scenario, k) {
                if !(seg.end > seg.start) {
                    continue;
                }
                let f = |u: f64| segment_integrand(scenario, k, &seg.active, u);
                let breaks = scenario.tiers[k].pathloss.kinks();
                total += if seg.end.is_finite() {
                    integrate_with_breaks(f, seg.start, seg.end, breaks, &ASSOCIATION_SPEC)
                } else {
                    integrate_semi_infinite_with_breaks(f, seg.start, breaks, &ASSOCIATION_SPEC)
                }
                .in_tier(k)?;
            }
            Ok(total)
        })
        .collect()
}

/// Association probabilities and conditional serving-distance densities.
#[derive(Debug, Clone)]
pub struct Association {
    scenario: NetworkScenario,
    p_star: Vec<f64>,
}

impl Association {
    pub fn new(scenario: &NetworkScenario) -> Result<Self> {
        scenario.validate()?;
        let p_star = association_probability(scenario)?;
        Ok(Self {
            scenario: scenario.clone(),
            p_star,
        })
    }

    pub fn p_star(&self) -> &[f64] {
        &self.p_star
    }

    pub fn scenario(&self) -> &NetworkScenario {
        &self.scenario
    }

    fn pk(&self, k: usize) -> Result<f64> {
        let p = self.p_star[k];
        if p > 1e-300 {
            Ok(p)
        } else {
            Err(Error::ZeroProbabilityTier { tier: k })
        }
    }

    /// `f_k(u)`, the density of the serving distance given service from tier `k`.
    pub fn conditional_pdf(&self, k: usize, u: f64) -> Result<f64> {
        Ok(association_integrand(&self.scenario, k, u) / self.pk(k)?)
    }

    /// `f_k(u)` from the homogeneous segment decomposition.
    pub fn conditional_pdf_segmented(&self, k: usize, u: f64) -> Result<f64> {
        require_homogeneous(&self.scenario)?;
        let p = self.pk(k)?;
        let seg = segments(&self.scenario, k)
            .into_iter()
            .find(|s| u >= s.start && u < s.end)
            .expect("segments cover the half-line");
        Ok(segment_integrand(&self.scenario, k, &seg.active, u) / p)
    }

    /// Two-tier closed forms for `f_k`.
    ///
    /// The tier with the smaller `β P G(0)` is excluded by the other at every
    /// distance; the stronger tier only sees the weaker one's exclusion disc
    /// beyond `u★ = G_s^{-1}((β_w P_w / β_s P_s) G_w(0))`.
    pub fn two_tier_pdf(&self, k: usize, u: f64) -> Result<f64> {
        let s = &self.scenario;
        if s.num_tiers() != 2 {
            return Err(Error::InvalidConfig("two-tier form needs exactly two tiers".into()));
        }
        require_homogeneous(s)?;
        let peak = |i: usize| s.tiers[i].biased_power() * s.tiers[i].pathloss.peak();
        let (weak, strong) = if peak(0) <= peak(1) { (0, 1) } else { (1, 0) };
        let (lw, ls) = (s.lambda(weak), s.lambda(strong));
        let p = self.pk(k)?;
        if u < 0.0 {
            return Ok(0.0);
        }
        if k == weak {
            let q = exclusion_radius(s, weak, strong, u);
            return Ok(2.0 * PI * lw / p * u * (-PI * (lw * u * u + ls * q * q)).exp());
        }
        let (tw, ts) = (&s.tiers[weak], &s.tiers[strong]);
        let u_star = ts.pathloss.inverse(tw.biased_power() / ts.biased_power() * tw.pathloss.peak());
        if u < u_star {
            Ok(2.0 * PI * ls / p * u * (-PI * ls * u * u).exp())
        } else {
            let q = exclusion_radius(s, strong, weak, u);
            Ok(2.0 * PI * ls / p * u * (-PI * (ls * u * u + lw * q * q)).exp())
        }
    }

    /// Breakpoints of `f_k`.
    pub fn breakpoints(&self, k: usize) -> Vec<f64> {
        association_breakpoints(&self.scenario, k)
    }

    /// `P(R★ > r)`, the probability that the serving base station is beyond `r`.
    pub fn serving_distance_tail(&self, r: f64) -> Result<f64> {
        let mut tail = 0.0;
        for k in 0..self.scenario.num_tiers() {
            let breaks = self.breakpoints(k);
            tail += integrate_semi_infinite_with_breaks(
                |u| association_integrand(&self.scenario, k, u),
                r,
                &breaks,
                &ASSOCIATION_SPEC,
            )
            .in_tier(k)?;
        }
        Ok(tail)
    }
}
