//! Hermite expansion of the count transform G_ν = F_ν⁻¹∘Φ: coefficients
//! g_k(ν), the link function L mapping latent to count autocorrelation, its
//! derivative, and the Whitt correlation bounds.

use crate::error::{Error, Result};
use crate::fourier::season_of;
use crate::latent::LatentSpec;
use crate::marginals::{MarginalSpec, CDF_CUTOFF};
use crate::normal;

/// Default expansion truncation order.
pub const DEFAULT_ORDER: usize = 30;

/// Probabilists' Hermite polynomial H_k(x), by the stable three-term
/// recursion H_k(x) = x·H_{k−1}(x) − (k−1)·H_{k−2}(x).
pub fn hermite_poly(k: usize, x: f64) -> f64 {
    match k {
        0 => 1.0,
        1 => x,
        _ => {
            let mut hm2 = 1.0;
            let mut hm1 = x;
            for i in 2..=k {
                let h = x * hm1 - (i as f64 - 1.0) * hm2;
                hm2 = hm1;
                hm1 = h;
            }
            hm1
        }
    }
}

/// Hermite coefficients of one season's transform, with the truncated
/// variance Σ_{k<=K} k!·g_k².
///
/// The Hermite tail of a step transform decays only algebraically
/// (k!·g_k² ~ k^{−3/2}), so `sigma2` approaches the true count variance at
/// rate K^{−1/2}. Link coefficients normalize by the truncated value, which
/// keeps L(1) = 1 exact in the stationary case.
#[derive(Debug, Clone)]
pub struct HermiteCoeffs {
    pub nu: u32,
    pub order: usize,
    /// Mean of X_ν (the k = 0 coefficient).
    pub g0: f64,
    /// g_1..g_K at indices 0..K−1. Underflows to zero near k ≈ 170 where k!
    /// leaves the double range; use `g_scaled` beyond that.
    pub g: Vec<f64>,
    /// √(k!)·g_k — the coefficients against orthonormal Hermite polynomials,
    /// stable at any order. sigma2 = Σ g_scaled².
    pub g_scaled: Vec<f64>,
    /// Σ_{k<=K} k!·g_k², the count variance up to truncation.
    pub sigma2: f64,
}

/// Hermite coefficients of G_ν via the telescoped closed form:
/// g_k(ν) = (k!√(2π))⁻¹ Σ_j exp(−z_j²/2)·H_{k−1}(z_j), z_j = Φ⁻¹(C_j(ν)).
/// Terms with C_j ∈ {0,1} vanish and are dropped; infinite supports stop at
/// the CDF cutoff. Evaluated through the orthonormal recursion so large
/// orders stay finite.
pub fn hermite_coeffs(marginal: &MarginalSpec, nu: u32, order: usize) -> Result<HermiteCoeffs> {
    if order == 0 {
        return Err(Error::domain("expansion order must be >= 1"));
    }
    let table = marginal.cdf_table(nu)?;
    let breaks: Vec<f64> = table
        .iter()
        .copied()
        .filter(|&c| c > 0.0 && c < CDF_CUTOFF)
        .map(normal::quantile)
        .collect();

    // accumulate Σ_j kernel_j · ψ_{k−1}(z_j) for all k in one sweep, with
    // ψ_m = H_m/√(m!) the orthonormal polynomials:
    // ψ_m(z) = (z·ψ_{m−1}(z) − √(m−1)·ψ_{m−2}(z))/√m
    let mut sums = vec![0.0_f64; order];
    for &z in &breaks {
        let kernel = (-0.5 * z * z).exp();
        let mut pm2 = 0.0; // ψ_{k−2}
        let mut pm1 = 1.0; // ψ_0
        sums[0] += kernel;
        // slot k0 belongs to order k0+1 and needs ψ_{k0}
        for (k0, slot) in sums.iter_mut().enumerate().skip(1) {
            let m = k0 as f64;
            let p = (z * pm1 - (m - 1.0).sqrt() * pm2) / m.sqrt();
            pm2 = pm1;
            pm1 = p;
            *slot += kernel * p;
        }
    }

    let sqrt_2pi = (2.0 * std::f64::consts::PI).sqrt();
    let mut g = Vec::with_capacity(order);
    let mut g_scaled = Vec::with_capacity(order);
    let mut sigma2 = 0.0;
    let mut sqrt_factorial = 1.0_f64;
    for (k0, s) in sums.iter().enumerate() {
        let k = k0 + 1;
        sqrt_factorial *= (k as f64).sqrt();
        // g̃_k = Σ kernel·ψ_{k−1} / (√k·√(2π)); H_{k−1}/k! = ψ_{k−1}/(√k·√(k!))
        let gt = s / ((k as f64).sqrt() * sqrt_2pi);
        sigma2 += gt * gt;
        g_scaled.push(gt);
        g.push(gt / sqrt_factorial);
    }

    Ok(HermiteCoeffs {
        nu,
        order,
        g0: marginal.mean(nu)?,
        g,
        g_scaled,
        sigma2,
    })
}

/// Variance of X_ν up to truncation order K: Σ_{k<=K} k!·g_k(ν)².
pub fn count_variance(marginal: &MarginalSpec, nu: u32, order: usize) -> Result<f64> {
    Ok(hermite_coeffs(marginal, nu, order)?.sigma2)
}

/// Power-series link for a season pair: L(u) = Σ_k ℓ_k u^k with
/// ℓ_k = k!·g_k(ν₁)g_k(ν₂)/(σ_X(ν₁)σ_X(ν₂)).
#[derive(Debug, Clone)]
pub struct LinkTable {
    pub nu1: u32,
    pub nu2: u32,
    /// ℓ_1..ℓ_K.
    pub coeffs: Vec<f64>,
}

pub fn link_table(
    marginal: &MarginalSpec,
    nu1: u32,
    nu2: u32,
    order: usize,
) -> Result<LinkTable> {
    let c1 = hermite_coeffs(marginal, nu1, order)?;
    let c2 = if nu2 == nu1 {
        c1.clone()
    } else {
        hermite_coeffs(marginal, nu2, order)?
    };
    let denom = (c1.sigma2 * c2.sigma2).sqrt();
    if !(denom > 0.0) {
        return Err(Error::Degenerate(format!(
            "zero count variance for season pair ({nu1},{nu2})"
        )));
    }
    let coeffs = (0..order)
        .map(|k0| c1.g_scaled[k0] * c2.g_scaled[k0] / denom)
        .collect();
    Ok(LinkTable { nu1, nu2, coeffs })
}

impl LinkTable {
    /// L(u) = Σ_k ℓ_k u^k, evaluated by Horner's rule.
    pub fn eval(&self, u: f64) -> f64 {
        let mut acc = 0.0;
        for &l in self.coeffs.iter().rev() {
            acc = (acc + l) * u;
        }
        acc
    }

    /// Termwise derivative Σ_k k·ℓ_k·u^{k−1} (used as a cross-check of the
    /// closed-form `link_derivative`).
    pub fn eval_derivative(&self, u: f64) -> f64 {
        let mut acc = 0.0;
        for (k0, &l) in self.coeffs.iter().enumerate().rev() {
            acc = acc * u + (k0 as f64 + 1.0) * l;
        }
        acc
    }
}

/// Closed-form link derivative (positive on (−1,1)):
/// L′(u) = Σ_{j₁,j₂} exp(−[z₁² + z₂² − 2u z₁z₂]/(2(1−u²)))
///         / (2π √(1−u²) σ_X(ν₁) σ_X(ν₂)),
/// summing over interior CDF breakpoints z = Φ⁻¹(C_j).
pub fn link_derivative(
    marginal: &MarginalSpec,
    nu1: u32,
    nu2: u32,
    u: f64,
    order: usize,
) -> Result<f64> {
    if !(u > -1.0 && u < 1.0) {
        return Err(Error::domain(format!(
            "link derivative requires |u| < 1, got {u}"
        )));
    }
    let z1 = interior_breaks(marginal, nu1)?;
    let z2 = interior_breaks(marginal, nu2)?;
    let s1 = count_variance(marginal, nu1, order)?.sqrt();
    let s2 = count_variance(marginal, nu2, order)?.sqrt();
    let one_minus = 1.0 - u * u;
    let mut sum = 0.0;
    for &a in &z1 {
        for &b in &z2 {
            sum += (-(a * a + b * b - 2.0 * u * a * b) / (2.0 * one_minus)).exp();
        }
    }
    Ok(sum / (2.0 * std::f64::consts::PI * one_minus.sqrt() * s1 * s2))
}

/// Whitt bounds: the extreme correlations achievable for marginals
/// (F_{ν₁}, F_{ν₂}), attained by the comonotone pair (F₁⁻¹(U), F₂⁻¹(U)) and
/// the antithetic pair (F₁⁻¹(U), F₂⁻¹(1−U)). The cross moments are exact
/// one-dimensional integrals of step functions over u ∈ (0,1).
pub fn correlation_bounds(marginal: &MarginalSpec, nu1: u32, nu2: u32) -> Result<(f64, f64)> {
    let t1 = marginal.cdf_table(nu1)?;
    let t2 = marginal.cdf_table(nu2)?;
    let (m1, v1) = moments_from_cdf(&t1);
    let (m2, v2) = moments_from_cdf(&t2);
    if !(v1 > 1e-12 && v2 > 1e-12) {
        return Err(Error::Degenerate(
            "correlation bounds need nondegenerate marginals".into(),
        ));
    }
    let e_max = comonotone_cross_moment(&t1, &t2);
    let e_min = antithetic_cross_moment(&t1, &t2);
    let denom = (v1 * v2).sqrt();
    Ok((
        (e_min - m1 * m2) / denom,
        (e_max - m1 * m2) / denom,
    ))
}

/// Count ACF via the link: ρ_X(t,r) = L(ρ_Z(t,r)) with the link table for the
/// season pair (s(t), s(r)).
pub fn count_acf(
    marginal: &MarginalSpec,
    latent: &LatentSpec,
    t: usize,
    r: usize,
    order: usize,
) -> Result<f64> {
    if t == r {
        return Ok(1.0);
    }
    let period = marginal.period();
    let table = link_table(marginal, season_of(t, period), season_of(r, period), order)?;
    Ok(table.eval(latent.acf(t, r)))
}

fn interior_breaks(marginal: &MarginalSpec, nu: u32) -> Result<Vec<f64>> {
    Ok(marginal
        .cdf_table(nu)?
        .iter()
        .copied()
        .filter(|&c| c > 0.0 && c < CDF_CUTOFF)
        .map(normal::quantile)
        .collect())
}

/// Mean and variance from a cumulative table: E X = Σ(1−C_j),
/// E X² = Σ(2j+1)(1−C_j).
fn moments_from_cdf(table: &[f64]) -> (f64, f64) {
    let mut mean = 0.0;
    let mut second = 0.0;
    for (j, &c) in table.iter().enumerate() {
        let tail = 1.0 - c;
        mean += tail;
        second += (2 * j + 1) as f64 * tail;
    }
    (mean, second - mean * mean)
}

/// E[F₁⁻¹(U)·F₂⁻¹(U)] for step quantile functions: two-pointer sweep over the
/// merged jump partition of (0,1).
fn comonotone_cross_moment(t1: &[f64], t2: &[f64]) -> f64 {
    let mut e = 0.0;
    let mut i = 0usize; // current value of F1^{-1} on the segment
    let mut j = 0usize;
    let mut u = 0.0;
    loop {
        let c1 = t1.get(i).copied().unwrap_or(1.0);
        let c2 = t2.get(j).copied().unwrap_or(1.0);
        let next = c1.min(c2).min(1.0);
        e += (next - u) * (i as f64) * (j as f64);
        u = next;
        if u >= 1.0 || (i >= t1.len() && j >= t2.len()) {
            break;
        }
        if c1 <= next {
            i += 1;
        }
        if c2 <= next {
            j += 1;
        }
    }
    e
}

/// E[F₁⁻¹(U)·F₂⁻¹(1−U)]: same sweep with the second quantile reflected.
fn antithetic_cross_moment(t1: &[f64], t2: &[f64]) -> f64 {
    // F2^{-1}(1−u) takes value j on the segment 1−C_j(2) < u <= 1−C_{j−1}(2),
    // so sweep u upward while walking t2 downward.
    let mut e = 0.0;
    let mut i = 0usize;
    let mut j = t2.len(); // F2^{-1}(1-u) = len for u in (0, 1 - C_{len-1})
    let mut u = 0.0;
    loop {
        let c1 = t1.get(i).copied().unwrap_or(1.0);
        // segment for the reflected quantile ends at 1 − C_{j−1}(2)
        let c2r = if j == 0 {
            1.0
        } else {
            1.0 - t2[j - 1]
        };
        let next = c1.min(c2r).min(1.0);
        e += (next - u) * (i as f64) * (j as f64);
        u = next;
        if u >= 1.0 {
            break;
        }
        if c1 <= next {
            i += 1;
        }
        if c2r <= next && j > 0 {
            j -= 1;
        }
    }
    e
}
