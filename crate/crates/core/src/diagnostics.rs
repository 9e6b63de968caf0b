//! Model adequacy tools: nonrandomized PIT histograms, probit residuals, and
//! sample ACF/PACF.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ghk::filter_pass;
use crate::latent::LatentSpec;
use crate::marginals::MarginalSpec;
use crate::normal;
use crate::simulate::CountSeries;

/// Nonrandomized mean PIT summary: bin masses of F̄ over J equal bins, plus
/// the per-time conditional CDF pair the construction rests on.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PitSummary {
    pub bins: usize,
    /// mass_j = F̄(j/J) − F̄((j−1)/J), j = 1..J; sums to one.
    pub masses: Vec<f64>,
    /// P̂_t(x_t − 1) per t.
    pub lower: Vec<f64>,
    /// P̂_t(x_t) per t.
    pub upper: Vec<f64>,
}

/// Piecewise-linear conditional PIT: F_t(u|y) is 0 below P_t(y−1), 1 above
/// P_t(y), and linear in between.
fn conditional_pit(u: f64, p_lo: f64, p_hi: f64) -> f64 {
    if u <= p_lo {
        0.0
    } else if u >= p_hi {
        1.0
    } else {
        (u - p_lo) / (p_hi - p_lo)
    }
}

/// Mean PIT F̄(u) = n⁻¹ Σ_t F_t(u|x_t).
pub fn mean_pit(lower: &[f64], upper: &[f64], u: f64) -> f64 {
    let n = lower.len() as f64;
    lower
        .iter()
        .zip(upper)
        .map(|(&lo, &hi)| conditional_pit(u, lo, hi))
        .sum::<f64>()
        / n
}

/// Run one filter pass and aggregate the nonrandomized mean PIT into J bins.
pub fn pit_summary(
    marginal: &MarginalSpec,
    latent: &LatentSpec,
    data: &CountSeries,
    particles: usize,
    crn_seed: u64,
    bins: usize,
) -> Result<PitSummary> {
    if bins == 0 {
        return Err(Error::domain("PIT needs at least one bin"));
    }
    let pass = filter_pass(marginal, latent, data, particles, crn_seed)?;
    let mut masses = Vec::with_capacity(bins);
    let mut prev = 0.0;
    for j in 1..=bins {
        let u = j as f64 / bins as f64;
        let f = mean_pit(&pass.pred_cdf_lower, &pass.pred_cdf_upper, u);
        masses.push(f - prev);
        prev = f;
    }
    Ok(PitSummary {
        bins,
        masses,
        lower: pass.pred_cdf_lower,
        upper: pass.pred_cdf_upper,
    })
}

/// Probit residuals r_t = Φ⁻¹((P̂_t(x_t−1) + P̂_t(x_t))/2), approximately
/// standard normal under a correct model. The mid-PIT is clamped away from
/// {0,1} before the probit.
pub fn residuals(
    marginal: &MarginalSpec,
    latent: &LatentSpec,
    data: &CountSeries,
    particles: usize,
    crn_seed: u64,
) -> Result<Vec<f64>> {
    let pass = filter_pass(marginal, latent, data, particles, crn_seed)?;
    Ok(pass
        .pred_cdf_lower
        .iter()
        .zip(&pass.pred_cdf_upper)
        .map(|(&lo, &hi)| {
            let mid = (0.5 * (lo + hi)).clamp(1e-12, 1.0 - 1e-12);
            normal::quantile(mid)
        })
        .collect())
}

/// Sample autocorrelations ρ̂(0..=max_lag); ρ̂(0) = 1.
pub fn acf(series: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = series.len();
    if n <= max_lag {
        return Err(Error::domain(format!(
            "series of length {n} cannot support lag {max_lag}"
        )));
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let denom: f64 = series.iter().map(|x| (x - mean) * (x - mean)).sum();
    if !(denom > 0.0) {
        return Err(Error::Degenerate(
            "constant series has no autocorrelation".into(),
        ));
    }
    let mut out = Vec::with_capacity(max_lag + 1);
    for h in 0..=max_lag {
        let num: f64 = (h..n)
            .map(|t| (series[t] - mean) * (series[t - h] - mean))
            .sum();
        out.push(num / denom);
    }
    Ok(out)
}

/// Sample partial autocorrelations at lags 1..=max_lag via Durbin–Levinson on
/// the sample ACF.
pub fn pacf(series: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let rho = acf(series, max_lag)?;
    let mut out = Vec::with_capacity(max_lag);
    let mut prev: Vec<f64> = Vec::new();
    let mut v = 1.0;
    for j in 1..=max_lag {
        let mut acc = rho[j];
        for (i, c) in prev.iter().enumerate() {
            acc -= c * rho[j - 1 - i];
        }
        let refl = if v > 0.0 { acc / v } else { 0.0 };
        let mut row = Vec::with_capacity(j);
        for i in 0..j - 1 {
            row.push(prev[i] - refl * prev[j - 2 - i]);
        }
        row.push(refl);
        v *= 1.0 - refl * refl;
        out.push(refl);
        prev = row;
    }
    Ok(out)
}

/// Convenience pair (ACF, PACF).
pub fn acf_pacf(series: &[f64], max_lag: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    Ok((acf(series, max_lag)?, pacf(series, max_lag)?))
}
