//! Generalized Poisson distribution, parametrized either by (rate λ,
//! dispersion η) or by its (mean, variance) pair.
//!
//! P(Y=k) = λ(λ+ηk)^{k−1} e^{−(λ+ηk)} / k!  with λ > 0, η ∈ [0,1), so that
//! E(Y) = λ/(1−η) and Var(Y) = λ/(1−η)³. η = 0 recovers Poisson(λ).

use crate::error::{Error, Result};

/// Invert the moment formulas: given mean μ > 0 and variance σ² >= μ,
/// return (λ, η) with η = 1−√(μ/σ²) and λ = μ√(μ/σ²).
pub fn from_moments(mu: f64, sigma2: f64) -> Result<(f64, f64)> {
    if !(mu > 0.0) {
        return Err(Error::domain(format!(
            "generalized Poisson mean must be positive, got {mu}"
        )));
    }
    if !(sigma2 >= mu) {
        return Err(Error::domain(format!(
            "generalized Poisson cannot be underdispersed: mean {mu} > variance {sigma2}"
        )));
    }
    let ratio = (mu / sigma2).sqrt();
    Ok((mu * ratio, 1.0 - ratio))
}

/// Untruncated pmf at k.
pub fn pmf(lambda: f64, eta: f64, k: u32) -> f64 {
    let kf = k as f64;
    let shifted = lambda + eta * kf;
    if shifted <= 0.0 {
        return 0.0;
    }
    let log_p =
        lambda.ln() + (kf - 1.0) * shifted.ln() - shifted - libm::lgamma(kf + 1.0);
    log_p.exp()
}
