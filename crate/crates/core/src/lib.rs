//! Gaussian-approximation bounds for aggregate interference and downlink
//! capacity in K-tier cellular networks modelled by Poisson point processes,
//! together with a Monte-Carlo oracle that checks every bound.
//!
//! The test user sits at the origin; every tier is described radially by its
//! density `μ_k(t)`, path-loss `G_k(t)` and fading power gain `H_k`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod association;
pub mod capacity;
pub mod error;
pub mod gaussian;
pub mod montecarlo;
pub mod numerics;
pub mod propagation;
pub mod spatial;

pub use error::{Error, NumericsError, Result};
