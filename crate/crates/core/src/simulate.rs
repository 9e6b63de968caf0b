//! Forward model: count series generated by pushing a standardized latent
//! Gaussian path through the seasonal quantile transform.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::season_of;
use crate::latent::LatentSpec;
use crate::marginals::MarginalSpec;
use crate::normal;

/// Observed or simulated counts x_1..x_n with a known period.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountSeries {
    pub x: Vec<u32>,
    pub period: u32,
}

impl CountSeries {
    pub fn new(x: Vec<u32>, period: u32) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::domain("count series must have n >= 1"));
        }
        if period == 0 {
            return Err(Error::domain("period must be >= 1"));
        }
        Ok(Self { x, period })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Season of 1-based time t.
    pub fn season(&self, t: usize) -> u32 {
        season_of(t, self.period)
    }
}

/// X = F_ν⁻¹(Φ(z)): the copula transform at one time point.
pub fn transform(marginal: &MarginalSpec, nu: u32, z: f64) -> Result<u32> {
    marginal.quantile(nu, normal::cdf(z))
}

/// Generate a count series of length n from the model (marginal, latent).
/// The latent path is exact (see `LatentSpec::simulate`), so the output is
/// strictly periodically stationary with marginals F_ν.
pub fn simulate_counts(
    marginal: &MarginalSpec,
    latent: &LatentSpec,
    n: usize,
    seed: u64,
) -> Result<CountSeries> {
    marginal.validate()?;
    latent.validate()?;
    if marginal.period() != latent.period() {
        return Err(Error::invalid(format!(
            "marginal period {} disagrees with latent period {}",
            marginal.period(),
            latent.period()
        )));
    }
    let z = latent.simulate(n, seed)?;
    let period = marginal.period();
    let mut x = Vec::with_capacity(n);
    for (t0, &zt) in z.iter().enumerate() {
        x.push(transform(marginal, season_of(t0 + 1, period), zt)?);
    }
    CountSeries::new(x, period)
}
