//! Seasonal count marginal distributions F_ν: pmf, cumulative probabilities
//! C_j(ν), quantiles, and their Fourier-constrained seasonal parametrizations.

pub mod genpoisson;
pub mod tsmc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::FourierCurve;

/// Days per week: binomial trial count, two-state-chain week length, and the
/// truncation point of the truncated generalized Poisson support {0..7}.
pub const WEEK_DAYS: u32 = 7;

/// CDF values above this are treated as 1 when truncating infinite-support
/// sums (the remaining terms are numerically zero).
pub const CDF_CUTOFF: f64 = 1.0 - 1e-12;

const MAX_SUPPORT_SCAN: u32 = 100_000;

/// A seasonal count marginal: one of the four families, with its seasonal
/// parameter curves. All curves share the marginal's period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum MarginalSpec {
    /// Poisson with mean curve λ(ν) > 0.
    Poisson { lambda: FourierCurve },
    /// Binomial with `WEEK_DAYS` trials and success curve p(ν) ∈ (0,1).
    Binomial { p: FourierCurve },
    /// Generalized Poisson with untruncated mean μ(ν) > 0 and variance
    /// σ²(ν) >= μ(ν), truncated and renormalized to {0..WEEK_DAYS}.
    TruncGenPoisson { mu: FourierCurve, sigma2: FourierCurve },
    /// Two-state Markov chain weekly wet-day count with persistence curves
    /// α(ν), β(ν) ∈ (0,1).
    Tsmc { alpha: FourierCurve, beta: FourierCurve },
}

impl MarginalSpec {
    pub fn period(&self) -> u32 {
        match self {
            MarginalSpec::Poisson { lambda } => lambda.period(),
            MarginalSpec::Binomial { p } => p.period(),
            MarginalSpec::TruncGenPoisson { mu, .. } => mu.period(),
            MarginalSpec::Tsmc { alpha, .. } => alpha.period(),
        }
    }

    /// Largest support point, or None for infinite support.
    pub fn support_top(&self) -> Option<u32> {
        match self {
            MarginalSpec::Poisson { .. } => None,
            _ => Some(WEEK_DAYS),
        }
    }

    /// Check every season's parameter invariants.
    pub fn validate(&self) -> Result<()> {
        match self {
            MarginalSpec::Poisson { lambda } => {
                for nu in 1..=lambda.period() {
                    let l = lambda.value(nu);
                    if !(l > 0.0) {
                        return Err(Error::invalid(format!(
                            "Poisson mean must be positive: lambda({nu}) = {l}"
                        )));
                    }
                }
            }
            MarginalSpec::Binomial { p } => {
                for nu in 1..=p.period() {
                    let v = p.value(nu);
                    if !(v > 0.0 && v < 1.0) {
                        return Err(Error::invalid(format!(
                            "binomial success probability must lie in (0,1): p({nu}) = {v}"
                        )));
                    }
                }
            }
            MarginalSpec::TruncGenPoisson { mu, sigma2 } => {
                if mu.period() != sigma2.period() {
                    return Err(Error::invalid("mean and variance curves disagree on period"));
                }
                for nu in 1..=mu.period() {
                    genpoisson::from_moments(mu.value(nu), sigma2.value(nu)).map_err(|_| {
                        Error::invalid(format!(
                            "generalized Poisson needs 0 < mu <= sigma2 at season {nu}: \
                             mu = {}, sigma2 = {}",
                            mu.value(nu),
                            sigma2.value(nu)
                        ))
                    })?;
                }
            }
            MarginalSpec::Tsmc { alpha, beta } => {
                if alpha.period() != beta.period() {
                    return Err(Error::invalid("alpha and beta curves disagree on period"));
                }
                for nu in 1..=alpha.period() {
                    let a = alpha.value(nu);
                    let b = beta.value(nu);
                    if !(a > 0.0 && a < 1.0 && b > 0.0 && b < 1.0) {
                        return Err(Error::invalid(format!(
                            "chain probabilities must lie in (0,1): alpha({nu}) = {a}, \
                             beta({nu}) = {b}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// P(X_ν = k).
    pub fn pmf(&self, nu: u32, k: u32) -> Result<f64> {
        match self {
            MarginalSpec::Poisson { lambda } => {
                let l = lambda.value(nu);
                if !(l > 0.0) {
                    return Err(Error::invalid(format!("lambda({nu}) = {l} not positive")));
                }
                Ok(poisson_pmf(l, k))
            }
            _ => {
                let v = self.pmf_vector(nu)?;
                Ok(v.get(k as usize).copied().unwrap_or(0.0))
            }
        }
    }

    /// Cumulative probability C_j(ν) = P(X_ν <= j); C_{−1} = 0 by convention,
    /// and any j below −1 is likewise 0.
    pub fn cdf(&self, nu: u32, j: i64) -> Result<f64> {
        if j < 0 {
            // parameters still have to be valid for the season
            self.check_season(nu)?;
            return Ok(0.0);
        }
        match self {
            MarginalSpec::Poisson { lambda } => {
                let l = lambda.value(nu);
                if !(l > 0.0) {
                    return Err(Error::invalid(format!("lambda({nu}) = {l} not positive")));
                }
                let mut c = 0.0;
                for k in 0..=(j as u32) {
                    c += poisson_pmf(l, k);
                }
                Ok(c.min(1.0))
            }
            _ => {
                let v = self.pmf_vector(nu)?;
                let top = (j as usize).min(v.len() - 1);
                let mut c = 0.0;
                for item in v.iter().take(top + 1) {
                    c += item;
                }
                Ok(c.min(1.0))
            }
        }
    }

    /// Quantile F_ν⁻¹(u) = inf{x : F_ν(x) >= u} for u ∈ [0,1]. Shares the
    /// partial-sum path with `cdf` so the two are exactly consistent at jump
    /// points.
    pub fn quantile(&self, nu: u32, u: f64) -> Result<u32> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::domain(format!("quantile level {u} outside [0,1]")));
        }
        if u <= 0.0 {
            self.check_season(nu)?;
            return Ok(0);
        }
        match self {
            MarginalSpec::Poisson { lambda } => {
                let l = lambda.value(nu);
                if !(l > 0.0) {
                    return Err(Error::invalid(format!("lambda({nu}) = {l} not positive")));
                }
                let mut c = 0.0;
                for k in 0..MAX_SUPPORT_SCAN {
                    let p = poisson_pmf(l, k);
                    c += p;
                    if c >= u || (1.0 - c < 1e-14 && p < 1e-16 && k as f64 > l) {
                        return Ok(k);
                    }
                }
                Ok(MAX_SUPPORT_SCAN)
            }
            _ => {
                let v = self.pmf_vector(nu)?;
                let mut c = 0.0;
                for (k, p) in v.iter().enumerate() {
                    c += p;
                    if c >= u {
                        return Ok(k as u32);
                    }
                }
                // float round-off at the very top of a finite support
                Ok((v.len() - 1) as u32)
            }
        }
    }

    /// Mean of X_ν.
    pub fn mean(&self, nu: u32) -> Result<f64> {
        match self {
            MarginalSpec::Poisson { lambda } => {
                let l = lambda.value(nu);
                if !(l > 0.0) {
                    return Err(Error::invalid(format!("lambda({nu}) = {l} not positive")));
                }
                Ok(l)
            }
            MarginalSpec::Binomial { p } => {
                self.check_season(nu)?;
                Ok(WEEK_DAYS as f64 * p.value(nu))
            }
            _ => {
                let v = self.pmf_vector(nu)?;
                Ok(v.iter().enumerate().map(|(k, p)| k as f64 * p).sum())
            }
        }
    }

    /// Cumulative probabilities C_0(ν), C_1(ν), ... For infinite supports the
    /// table stops at the first entry exceeding `CDF_CUTOFF`; for finite
    /// supports it has exactly top+1 entries (the last equal to 1 up to
    /// round-off).
    pub fn cdf_table(&self, nu: u32) -> Result<Vec<f64>> {
        match self {
            MarginalSpec::Poisson { lambda } => {
                let l = lambda.value(nu);
                if !(l > 0.0) {
                    return Err(Error::invalid(format!("lambda({nu}) = {l} not positive")));
                }
                let mut out = Vec::with_capacity(32);
                let mut c = 0.0;
                for k in 0..MAX_SUPPORT_SCAN {
                    c += poisson_pmf(l, k);
                    out.push(c.min(1.0));
                    if c > CDF_CUTOFF {
                        break;
                    }
                }
                Ok(out)
            }
            _ => {
                let v = self.pmf_vector(nu)?;
                let mut out = Vec::with_capacity(v.len());
                let mut c = 0.0;
                for p in &v {
                    c += p;
                    out.push(c.min(1.0));
                }
                Ok(out)
            }
        }
    }

    /// Full pmf vector over the finite support (not available for Poisson).
    pub fn pmf_vector(&self, nu: u32) -> Result<Vec<f64>> {
        match self {
            MarginalSpec::Poisson { .. } => Err(Error::domain(
                "pmf_vector is only defined for finite-support marginals",
            )),
            MarginalSpec::Binomial { p } => {
                let v = p.value(nu);
                if !(v > 0.0 && v < 1.0) {
                    return Err(Error::invalid(format!("p({nu}) = {v} outside (0,1)")));
                }
                Ok(binomial_pmf_vector(v))
            }
            MarginalSpec::TruncGenPoisson { mu, sigma2 } => {
                let (lambda, eta) = genpoisson::from_moments(mu.value(nu), sigma2.value(nu))
                    .map_err(|e| {
                        Error::invalid(format!("generalized Poisson at season {nu}: {e}"))
                    })?;
                let mut v: Vec<f64> = (0..=WEEK_DAYS)
                    .map(|k| genpoisson::pmf(lambda, eta, k))
                    .collect();
                let total: f64 = v.iter().sum();
                if !(total > 0.0) {
                    return Err(Error::invalid(format!(
                        "generalized Poisson mass on the truncated support vanished at season {nu}"
                    )));
                }
                for p in &mut v {
                    *p /= total;
                }
                Ok(v)
            }
            MarginalSpec::Tsmc { alpha, beta } => {
                tsmc::pmf(alpha.value(nu), beta.value(nu), WEEK_DAYS as usize).map_err(|e| {
                    Error::invalid(format!("two-state chain at season {nu}: {e}"))
                })
            }
        }
    }

    fn check_season(&self, nu: u32) -> Result<()> {
        match self {
            MarginalSpec::Poisson { lambda } => {
                let l = lambda.value(nu);
                if !(l > 0.0) {
                    return Err(Error::invalid(format!("lambda({nu}) = {l} not positive")));
                }
            }
            _ => {
                self.pmf_vector(nu)?;
            }
        }
        Ok(())
    }
}

fn poisson_pmf(lambda: f64, k: u32) -> f64 {
    let kf = k as f64;
    (kf * lambda.ln() - lambda - libm::lgamma(kf + 1.0)).exp()
}

fn binomial_pmf_vector(p: f64) -> Vec<f64> {
    const CHOOSE: [f64; 8] = [1.0, 7.0, 21.0, 35.0, 35.0, 21.0, 7.0, 1.0];
    let q = 1.0 - p;
    (0..=WEEK_DAYS as usize)
        .map(|k| CHOOSE[k] * p.powi(k as i32) * q.powi((WEEK_DAYS as usize - k) as i32))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn poisson(level: f64, period: u32) -> MarginalSpec {
        MarginalSpec::Poisson {
            lambda: FourierCurve::constant(level, period).unwrap(),
        }
    }

    fn binomial(p: f64) -> MarginalSpec {
        MarginalSpec::Binomial {
            p: FourierCurve::constant(p, 10).unwrap(),
        }
    }

    #[test]
    fn poisson_pmf_and_cdf_values() {
        let m = poisson(1.0, 10);
        assert!((m.pmf(1, 0).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        assert!((m.cdf(1, 1).unwrap() - 2.0 * (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(m.cdf(1, -1).unwrap(), 0.0);
    }

    #[test]
    fn quantile_examples() {
        let m = poisson(1.0, 10);
        assert_eq!(m.quantile(1, 0.0).unwrap(), 0);
        // C_0 ≈ 0.3679 < 0.5 <= C_1 ≈ 0.7358
        assert_eq!(m.quantile(1, 0.5).unwrap(), 1);
        let b = binomial(0.5);
        assert_eq!(b.quantile(1, 1.0).unwrap(), 7);
        assert_eq!(b.cdf(1, 7).unwrap(), 1.0);
        assert!(m.quantile(1, 1.5).is_err());
        assert!(m.quantile(1, -0.1).is_err());
    }

    #[test]
    fn tsmc_symmetric_is_iid_bernoulli_days() {
        let m = MarginalSpec::Tsmc {
            alpha: FourierCurve::constant(0.5, 10).unwrap(),
            beta: FourierCurve::constant(0.5, 10).unwrap(),
        };
        for k in 0..=7u32 {
            let choose = [1.0, 7.0, 21.0, 35.0, 35.0, 21.0, 7.0, 1.0][k as usize];
            assert!((m.pmf(1, k).unwrap() - choose / 128.0).abs() < 1e-14);
        }
    }

    #[test]
    fn trunc_genpoisson_equidispersed_is_renormalized_poisson() {
        let m = MarginalSpec::TruncGenPoisson {
            mu: FourierCurve::constant(4.0, 10).unwrap(),
            sigma2: FourierCurve::constant(4.0, 10).unwrap(),
        };
        let raw: Vec<f64> = (0..=7).map(|k| poisson_pmf(4.0, k)).collect();
        let total: f64 = raw.iter().sum();
        for k in 0..=7u32 {
            assert!((m.pmf(1, k).unwrap() - raw[k as usize] / total).abs() < 1e-14);
        }
    }

    #[test]
    fn trunc_genpoisson_proportional_to_untruncated() {
        let m = MarginalSpec::TruncGenPoisson {
            mu: FourierCurve::constant(4.0, 10).unwrap(),
            sigma2: FourierCurve::constant(8.0, 10).unwrap(),
        };
        let (lambda, eta) = genpoisson::from_moments(4.0, 8.0).unwrap();
        let v = m.pmf_vector(1).unwrap();
        let ratio = v[0] / genpoisson::pmf(lambda, eta, 0);
        for k in 1..=7u32 {
            let r = v[k as usize] / genpoisson::pmf(lambda, eta, k);
            assert!((r - ratio).abs() < 1e-12 * ratio, "k={k}");
        }
    }

    #[test]
    fn pmf_sums_to_one_across_families_and_seasons() {
        let specs: Vec<MarginalSpec> = vec![
            MarginalSpec::Poisson {
                lambda: FourierCurve::new(10.0, 5.0, 5.0, 10).unwrap(),
            },
            MarginalSpec::Binomial {
                p: FourierCurve::new(0.5, 0.3, 2.0, 10).unwrap(),
            },
            MarginalSpec::TruncGenPoisson {
                mu: FourierCurve::new(3.0, 1.0, 4.0, 10).unwrap(),
                sigma2: FourierCurve::new(6.0, 1.5, 4.0, 10).unwrap(),
            },
            MarginalSpec::Tsmc {
                alpha: FourierCurve::new(0.4, 0.2, 5.0, 10).unwrap(),
                beta: FourierCurve::new(0.5, 0.2, 0.3, 10).unwrap(),
            },
        ];
        for spec in &specs {
            spec.validate().unwrap();
            for nu in 1..=10 {
                let total = match spec {
                    MarginalSpec::Poisson { .. } => {
                        let mut c = 0.0;
                        let mut k = 0;
                        loop {
                            let p = spec.pmf(nu, k).unwrap();
                            c += p;
                            if p < 1e-15 && k > 30 {
                                break c;
                            }
                            k += 1;
                        }
                    }
                    _ => spec.pmf_vector(nu).unwrap().iter().sum(),
                };
                assert!((total - 1.0).abs() < 1e-10, "{spec:?} season {nu}");
            }
        }
    }

    #[test]
    fn cdf_table_cutoff_and_monotonicity() {
        let m = poisson(10.0, 10);
        let table = m.cdf_table(1).unwrap();
        assert!(table.last().copied().unwrap() > CDF_CUTOFF);
        for w in table.windows(2) {
            assert!(w[1] >= w[0]);
        }
        // finite support: exactly 8 entries, last is 1
        let b = binomial(0.3);
        let table = b.cdf_table(1).unwrap();
        assert_eq!(table.len(), 8);
        assert!((table[7] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn invariant_violation_reports_error() {
        let m = poisson(1.0, 10);
        assert!(m.validate().is_ok());
        let bad = MarginalSpec::Poisson {
            lambda: FourierCurve::new(1.0, 2.0, 0.0, 10).unwrap(),
        };
        assert!(bad.validate().is_err());
        let bad_bin = MarginalSpec::Binomial {
            p: FourierCurve::new(0.9, 0.3, 0.0, 10).unwrap(),
        };
        assert!(bad_bin.validate().is_err());
    }

    proptest! {
        // quantile(u) <= j  <=>  u <= cdf(j)
        #[test]
        fn galois_connection_poisson(u in 1e-9f64..0.999_999_999, j in 0i64..40) {
            let m = poisson(3.0, 10);
            let q = m.quantile(1, u).unwrap() as i64;
            let c = m.cdf(1, j).unwrap();
            prop_assert_eq!(q <= j, u <= c);
        }

        #[test]
        fn galois_connection_tsmc(u in 1e-9f64..0.999_999_999, j in 0i64..8) {
            let m = MarginalSpec::Tsmc {
                alpha: FourierCurve::constant(0.6, 10).unwrap(),
                beta: FourierCurve::constant(0.7, 10).unwrap(),
            };
            let q = m.quantile(1, u).unwrap() as i64;
            let c = m.cdf(1, j).unwrap();
            prop_assert_eq!(q <= j, u <= c);
        }
    }
}
