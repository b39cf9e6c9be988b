use thiserror::Error;

/// Failures of the low-level numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("invalid quadrature settings: {0}")]
    InvalidSpec(&'static str),
    #[error("integrand is not finite near {at}")]
    NonFinite { at: f64 },
    #[error("quadrature on [{lower}, {upper}] did not converge (estimate {estimate}, error {error})")]
    NonConvergent {
        lower: f64,
        upper: f64,
        estimate: f64,
        error: f64,
    },
    #[error("threshold search unbounded: condition still holds at {probed}")]
    Unbounded { probed: f64 },
}

/// Errors reported by the analysis and simulation layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("tier {tier}: {source}")]
    Tier {
        tier: usize,
        #[source]
        source: NumericsError,
    },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("interference variance is zero or underflows")]
    DegenerateVariance,
    #[error("tier {tier} has numerically zero association probability")]
    ZeroProbabilityTier { tier: usize },
    #[error("tier {tier} does not have a homogeneous density")]
    NonHomogeneousDensity { tier: usize },
    #[error("tier {tier}: simulation window {radius} fails the truncation check")]
    WindowTooSmall { tier: usize, radius: f64 },
    #[error("{count} realizations contained no base station")]
    EmptyRealization { count: u64 },
}

impl Error {
    /// True for quadrature failures, wrapped or not.
    pub fn is_non_convergent(&self) -> bool {
        matches!(
            self,
            Error::Numerics(NumericsError::NonConvergent { .. })
                | Error::Tier {
                    source: NumericsError::NonConvergent { .. },
                    ..
                }
        )
    }

    /// Index of the tier the failure is attributed to, if any.
    pub fn tier(&self) -> Option<usize> {
        match self {
            Error::Tier { tier, .. }
            | Error::ZeroProbabilityTier { tier }
            | Error::NonHomogeneousDensity { tier }
            | Error::WindowTooSmall { tier, .. } => Some(*tier),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) trait TierContext<T> {
    fn in_tier(self, tier: usize) -> Result<T>;
}

impl<T> TierContext<T> for std::result::Result<T, NumericsError> {
    fn in_tier(self, tier: usize) -> Result<T> {
        self.map_err(|source| Error::Tier { tier, source })
    }
}
