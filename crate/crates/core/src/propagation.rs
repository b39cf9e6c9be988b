//! Path-loss and fading models.
//!
//! Fading acts on received power: Rayleigh amplitude fading is an
//! exponential power gain and Nakagami-m is `Gamma(m, 1/m)`, both with unit
//! mean.

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma_ur, ln_gamma};

use crate::error::{Error, Result};
use crate::numerics::invert_monotone_decreasing;

/// Bounded, non-increasing attenuation `G(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PathLossModel {
    /// `G(t) = 1 / (1 + t^α)`, `α > 2`.
    BoundedPowerLaw { alpha: f64 },
    /// `G(t) = exp(-α t^β)`, `α > 0`, `β ∈ (0, 1]`.
    StretchedExponential { alpha: f64, beta: f64 },
    /// Log-linear interpolation of a strictly decreasing table starting at
    /// `t = 0`, continued by `g_n (t_n / t)^p` past the last node.
    Custom {
        distances: Vec<f64>,
        gains: Vec<f64>,
        tail_exponent: f64,
    },
}

fn pow_alpha(t: f64, alpha: f64) -> f64 {
    if alpha.fract() == 0.0 && alpha.abs() <= 64.0 {
        t.powi(alpha as i32)
    } else {
        t.powf(alpha)
    }
}

impl PathLossModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            PathLossModel::BoundedPowerLaw { alpha } => {
                if !(*alpha > 2.0) || !alpha.is_finite() {
                    return Err(Error::InvalidConfig(format!("power-law exponent must exceed 2, got {alpha}")));
                }
            }
            PathLossModel::StretchedExponential { alpha, beta } => {
                if !(*alpha > 0.0) || !alpha.is_finite() {
                    return Err(Error::InvalidConfig(format!("stretched-exponential rate must be positive, got {alpha}")));
                }
                if !(*beta > 0.0 && *beta <= 1.0) {
                    return Err(Error::InvalidConfig(format!("stretched-exponential shape must lie in (0, 1], got {beta}")));
                }
            }
            PathLossModel::Custom {
                distances,
                gains,
                tail_exponent,
            } => {
                if distances.len() < 2 || distances.len() != gains.len() {
                    return Err(Error::InvalidConfig(
                        "custom path loss needs at least two (distance, gain) pairs".into(),
                    ));
                }
                if distances[0] != 0.0 {
                    return Err(Error::InvalidConfig("custom path-loss table must start at distance 0".into()));
                }
                if distances.windows(2).any(|w| !(w[1] > w[0])) || distances.iter().any(|d| !d.is_finite()) {
                    return Err(Error::InvalidConfig("custom path-loss distances must increase strictly".into()));
                }
                if gains.iter().any(|g| !(*g > 0.0) || !g.is_finite()) || gains.windows(2).any(|w| !(w[1] < w[0])) {
                    return Err(Error::InvalidConfig(
                        "custom path-loss gains must be positive and strictly decreasing".into(),
                    ));
                }
                if !(*tail_exponent > 2.0) || !tail_exponent.is_finite() {
                    return Err(Error::InvalidConfig(format!(
                        "custom path-loss tail exponent must exceed 2, got {tail_exponent}"
                    )));
                }
                // Decay proxy over the last table segment; the true tail order
                // beyond the table is taken from `tail_exponent`.
                let n = distances.len();
                let (t0, t1) = (distances[n - 2], distances[n - 1]);
                if t0 > 0.0 {
                    let slope = (gains[n - 1] / gains[n - 2]).ln() / (t1 / t0).ln();
                    if slope > -2.0 {
                        return Err(Error::InvalidConfig(format!(
                            "custom path-loss table decays like t^{slope:.3} at its end, slower than t^-2"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// `G(t)` for `t ≥ 0`.
    pub fn gain(&self, t: f64) -> f64 {
        match self {
            PathLossModel::BoundedPowerLaw { alpha } => 1.0 / (1.0 + pow_alpha(t, *alpha)),
            PathLossModel::StretchedExponential { alpha, beta } => {
                if *beta == 1.0 {
                    (-alpha * t).exp()
                } else if *beta == 0.5 {
                    (-alpha * t.sqrt()).exp()
                } else {
                    (-alpha * t.powf(*beta)).exp()
                }
            }
            PathLossModel::Custom {
                distances,
                gains,
                tail_exponent,
            } => {
                let n = distances.len();
                if t >= distances[n - 1] {
                    return gains[n - 1] * (distances[n - 1] / t).powf(*tail_exponent);
                }
                let j = distances.partition_point(|&d| d <= t).saturating_sub(1);
                let w = (t - distances[j]) / (distances[j + 1] - distances[j]);
                gains[j] * (gains[j + 1] / gains[j]).powf(w)
            }
        }
    }

    /// `G(0)`.
    pub fn peak(&self) -> f64 {
        match self {
            PathLossModel::Custom { gains, .. } => gains[0],
            _ => 1.0,
        }
    }

    /// `inf { t ≥ 0 : G(t) = y }`, zero when `y ≥ G(0)` and `+∞` at `y = 0`.
    pub fn inverse(&self, y: f64) -> f64 {
        if y >= self.peak() {
            return 0.0;
        }
        if y <= 0.0 {
            return f64::INFINITY;
        }
        match self {
            PathLossModel::BoundedPowerLaw { alpha } => {
                let x = 1.0 / y - 1.0;
                if *alpha == 3.0 {
                    x.cbrt()
                } else {
                    x.powf(1.0 / alpha)
                }
            }
            PathLossModel::StretchedExponential { alpha, beta } => {
                let x = -y.ln() / alpha;
                if *beta == 1.0 {
                    x
                } else {
                    x.powf(1.0 / beta)
                }
            }
            PathLossModel::Custom { distances, .. } => {
                let last = distances[distances.len() - 1];
                invert_monotone_decreasing(|t| self.gain(t), y, (0.0, last))
            }
        }
    }

    /// Polynomial decay order of the tail; `∞` for faster-than-polynomial decay.
    pub fn decay_exponent(&self) -> f64 {
        match self {
            PathLossModel::BoundedPowerLaw { alpha } => *alpha,
            PathLossModel::StretchedExponential { .. } => f64::INFINITY,
            PathLossModel::Custom { tail_exponent, .. } => *tail_exponent,
        }
    }

    /// Points where `G` is not smooth.
    pub fn kinks(&self) -> &[f64] {
        match self {
            PathLossModel::Custom { distances, .. } => &distances[1..],
            _ => &[],
        }
    }
}

/// Distribution of the fading power gain `H`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FadingModel {
    /// Unit-mean exponential power gain.
    Rayleigh,
    /// `Gamma(m, 1/m)` power gain, `m ≥ 1/2`.
    Nakagami { m: f64 },
    /// Constant gain `h`.
    Deterministic { h: f64 },
}

impl FadingModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            FadingModel::Rayleigh => Ok(()),
            FadingModel::Nakagami { m } => {
                if *m >= 0.5 && m.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidConfig(format!("Nakagami shape must be at least 0.5, got {m}")))
                }
            }
            FadingModel::Deterministic { h } => {
                if *h > 0.0 && h.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidConfig(format!("deterministic gain must be positive, got {h}")))
                }
            }
        }
    }

    /// `E[H^n]`.
    pub fn moment(&self, n: u32) -> f64 {
        match self {
            FadingModel::Rayleigh => (1..=n).map(f64::from).product(),
            FadingModel::Nakagami { m } => (0..n).map(|j| (m + f64::from(j)) / m).product(),
            FadingModel::Deterministic { h } => h.powi(n as i32),
        }
    }

    pub fn is_deterministic(&self) -> bool {
        matches!(self, FadingModel::Deterministic { .. })
    }

    /// Density `q(h)`; zero for the deterministic model.
    pub fn pdf(&self, h: f64) -> f64 {
        if h < 0.0 {
            return 0.0;
        }
        match self {
            FadingModel::Rayleigh => (-h).exp(),
            FadingModel::Nakagami { m } => {
                if h == 0.0 {
                    return if *m < 1.0 {
                        f64::INFINITY
                    } else if *m == 1.0 {
                        1.0
                    } else {
                        0.0
                    };
                }
                (m * m.ln() + (m - 1.0) * h.ln() - m * h - ln_gamma(*m)).exp()
            }
            FadingModel::Deterministic { .. } => 0.0,
        }
    }

    /// `P(H ≥ h)`.
    pub fn ccdf(&self, h: f64) -> f64 {
        if h <= 0.0 {
            return 1.0;
        }
        match self {
            FadingModel::Rayleigh => (-h).exp(),
            FadingModel::Nakagami { m } => gamma_ur(*m, m * h),
            FadingModel::Deterministic { h: h0 } => {
                if h <= *h0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn sampler(&self) -> FadingSampler {
        match self {
            FadingModel::Rayleigh => FadingSampler::Exponential,
            FadingModel::Nakagami { m } => {
                FadingSampler::Gamma(Gamma::new(*m, 1.0 / m).expect("validated Nakagami shape"))
            }
            FadingModel::Deterministic { h } => FadingSampler::Constant(*h),
        }
    }

    /// One draw of `H`. Build a [`FadingSampler`] for repeated draws.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.sampler().sample(rng)
    }
}

/// Prepared sampler for a [`FadingModel`].
#[derive(Debug, Clone, Copy)]
pub enum FadingSampler {
    Exponential,
    Gamma(Gamma<f64>),
    Constant(f64),
}

impl FadingSampler {
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            FadingSampler::Exponential => Exp1.sample(rng),
            FadingSampler::Gamma(g) => g.sample(rng),
            FadingSampler::Constant(h) => *h,
        }
    }
}
