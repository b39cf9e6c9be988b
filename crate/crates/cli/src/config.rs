//! JSON scenario files.

use std::fmt;

use hetnet_core::capacity::Policy;
use hetnet_core::gaussian::ExclusionProfile;
use hetnet_core::montecarlo::FarFieldMode;
use hetnet_core::spatial::NetworkScenario;
use serde::Deserialize;

/// A scenario file that parsed but does not describe a runnable job.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub parameter: String,
    pub values: Vec<f64>,
}

/// Either an explicit list or `points` evenly spaced values on `[from, to]`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Range { from: f64, to: f64, points: usize },
    List(Vec<f64>),
}

impl Default for Grid {
    fn default() -> Self {
        Grid::List(Vec::new())
    }
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Grid::List(v) => v.clone(),
            Grid::Range { from, to, points } => match *points {
                0 => Vec::new(),
                1 => vec![*from],
                n => (0..n).map(|i| from + (to - from) * i as f64 / (n - 1) as f64).collect(),
            },
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PolicySpec {
    #[default]
    Barss,
    Generic {
        tier: usize,
        distance: f64,
        #[serde(default)]
        exclusion: Option<Vec<f64>>,
    },
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McOverrides {
    pub realizations: Option<u64>,
    pub seed: Option<u64>,
    pub windows: Option<Vec<f64>>,
    pub far_field: Option<FarFieldMode>,
    pub confidence: Option<f64>,
}

fn default_xi_scale() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub scenario: NetworkScenario,
    #[serde(default)]
    pub sweep: Option<Sweep>,
    #[serde(default)]
    pub x_grid: Grid,
    #[serde(default)]
    pub tau_grid: Grid,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub gamma_vec: Option<Vec<f64>>,
    #[serde(default)]
    pub policy: PolicySpec,
    /// Interferer exclusion radii for the interference CDF, one per tier.
    #[serde(default)]
    pub exclusion: Option<Vec<f64>>,
    #[serde(default)]
    pub mc: McOverrides,
    #[serde(default = "default_xi_scale")]
    pub xi_scale: f64,
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let file: ScenarioFile = serde_json::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        file.validate()?;
        Ok(file)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError(m));
        self.scenario.validate().map_err(|e| match e {
            hetnet_core::Error::InvalidConfig(m) => ConfigError(m),
            e => ConfigError(e.to_string()),
        })?;
        let k = self.scenario.num_tiers();
        if let Some(s) = &self.sweep {
            if s.parameter != "kappa" {
                return bad(format!("unsupported sweep parameter {:?}", s.parameter));
            }
            if s.values.is_empty() || s.values.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
                return bad("sweep values must be positive and finite".into());
            }
        }
        for (name, g) in [("x_grid", &self.x_grid), ("tau_grid", &self.tau_grid)] {
            let v = g.values();
            if v.iter().any(|x| !x.is_finite()) || v.windows(2).any(|w| w[0] >= w[1]) {
                return bad(format!("{name} must be finite and strictly ascending"));
            }
        }
        if self.tau_grid.values().iter().any(|t| *t < 0.0) {
            return bad("tau_grid must be non-negative".into());
        }
        if let Some(g) = self.gamma {
            if !(g > 0.0 && g < 1.0) {
                return bad(format!("gamma must lie in (0, 1), got {g}"));
            }
        }
        if let Some(v) = &self.gamma_vec {
            if v.len() != k || v.iter().any(|g| !(*g > 0.0 && *g < 1.0)) {
                return bad(format!("gamma_vec needs {k} values in (0, 1)"));
            }
        }
        for (name, radii) in [("exclusion", &self.exclusion), ("mc.windows", &self.mc.windows)] {
            if let Some(r) = radii {
                if r.len() != k || r.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
                    return bad(format!("{name} needs {k} non-negative radii"));
                }
            }
        }
        if let PolicySpec::Generic { tier, distance, exclusion } = &self.policy {
            if *tier >= k || !(*distance > 0.0) {
                return bad("generic policy needs a valid tier index and a positive distance".into());
            }
            if let Some(r) = exclusion {
                if r.len() != k || r.iter().any(|x| !(*x >= 0.0)) {
                    return bad(format!("policy exclusion needs {k} non-negative radii"));
                }
            }
        }
        if !(self.xi_scale >= 0.0) || !self.xi_scale.is_finite() {
            return bad("xi_scale must be non-negative".into());
        }
        Ok(())
    }

    /// Sweep values, or the scenario's own `κ` when there is no sweep.
    pub fn kappas(&self) -> Vec<f64> {
        match &self.sweep {
            Some(s) => s.values.clone(),
            None => vec![self.scenario.kappa],
        }
    }

    pub fn at_kappa(&self, kappa: f64) -> NetworkScenario {
        self.scenario.clone().with_kappa(kappa)
    }

    pub fn policy(&self) -> Policy {
        let k = self.scenario.num_tiers();
        match &self.policy {
            PolicySpec::Barss => Policy::Barss,
            PolicySpec::Generic { tier, distance, exclusion } => Policy::Generic {
                tier: *tier,
                distance: *distance,
                exclusion: ExclusionProfile::generic(exclusion.clone().unwrap_or_else(|| vec![0.0; k])),
            },
        }
    }

    pub fn exclusion(&self) -> ExclusionProfile {
        match &self.exclusion {
            Some(r) => ExclusionProfile::generic(r.clone()),
            None => ExclusionProfile::none(self.scenario.num_tiers()),
        }
    }

    pub fn gammas(&self) -> Result<Vec<f64>, ConfigError> {
        match (&self.gamma_vec, self.gamma) {
            (Some(v), _) => Ok(v.clone()),
            (None, Some(g)) => Ok(vec![g; self.scenario.num_tiers()]),
            (None, None) => Err(ConfigError("gamma or gamma_vec is required".into())),
        }
    }

    pub fn gamma(&self) -> Result<f64, ConfigError> {
        self.gamma.ok_or_else(|| ConfigError("gamma is required".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "scenario": {"tiers": [{"power": 1, "intensity": 1,
            "pathloss": {"kind": "bounded_power_law", "alpha": 3},
            "fading": {"kind": "rayleigh"}}]},
        "x_grid": {"from": -4, "to": 4, "points": 201}
    }"#;

    #[test]
    fn range_grid_has_requested_points() {
        let f = ScenarioFile::parse(MINIMAL).unwrap();
        let x = f.x_grid.values();
        assert_eq!(x.len(), 201);
        assert_eq!(x[0], -4.0);
        assert_eq!(x[200], 4.0);
        assert_eq!(f.kappas(), vec![1.0]);
    }

    #[test]
    fn rejects_bad_sweep() {
        let text = MINIMAL.replace(
            "\"x_grid\"",
            "\"sweep\": {\"parameter\": \"kappa\", \"values\": [1, -2]}, \"x_grid\"",
        );
        assert!(ScenarioFile::parse(&text).is_err());
    }

    #[test]
    fn rejects_unknown_field() {
        let text = MINIMAL.replace("\"x_grid\"", "\"xgrid\"");
        assert!(ScenarioFile::parse(&text).is_err());
    }

    #[test]
    fn gamma_expands_per_tier() {
        let text = MINIMAL.replace("\"x_grid\"", "\"gamma\": 0.15, \"x_grid\"");
        let f = ScenarioFile::parse(&text).unwrap();
        assert_eq!(f.gammas().unwrap(), vec![0.15]);
    }
}
