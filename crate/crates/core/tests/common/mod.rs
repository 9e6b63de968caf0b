//! Independent oracles shared by the acceptance suite. Everything here
//! recomputes expected values by routes that do not pass through the library
//! paths under test.

#![allow(dead_code)]

use percount::marginals::CDF_CUTOFF;
use percount::MarginalSpec;

/// MA(∞)-truncation autocorrelation of the SAR(1)+AR(1) system
/// Z_t = Σ_m φ^m η_{t−mT}, η_t = Σ_j α^j ε_{t−j}, truncated once the
/// coefficients fall below 1e−14.
pub fn ma_infinity_sar1_acf(phi: f64, alpha: f64, period: usize, h: usize) -> f64 {
    let mut psi = Vec::new();
    let mut u = 0usize;
    loop {
        let mut s = 0.0;
        let mut m = 0usize;
        while m * period <= u {
            s += phi.powi(m as i32) * alpha.powi((u - m * period) as i32);
            m += 1;
        }
        psi.push(s);
        if s.abs() < 1e-14 && u > 20 * period + h {
            break;
        }
        u += 1;
        if u > 500_000 {
            break;
        }
    }
    let var: f64 = psi.iter().map(|p| p * p).sum();
    let cov: f64 = (h..psi.len()).map(|i| psi[i] * psi[i - h]).sum();
    cov / var
}

/// Brute-force pmf of the weekly two-state-chain count: enumerate all 2^L
/// day paths from both initial states, weighting by the stationary law.
pub fn tsmc_enumeration_pmf(alpha: f64, beta: f64, len: usize) -> Vec<f64> {
    let denom = 2.0 - alpha - beta;
    let pi0 = (1.0 - beta) / denom;
    let pi1 = (1.0 - alpha) / denom;
    let mut out = vec![0.0; len + 1];
    for bits in 0u32..(1 << len) {
        let path: Vec<usize> = (0..len).map(|d| ((bits >> d) & 1) as usize).collect();
        let wet: usize = path.iter().sum();
        for (m0, pi) in [(0usize, pi0), (1usize, pi1)] {
            let mut prob = pi;
            let mut state = m0;
            for &s in &path {
                prob *= match (state, s) {
                    (0, 0) => alpha,
                    (0, 1) => 1.0 - alpha,
                    (1, 1) => beta,
                    (1, 0) => 1.0 - beta,
                    _ => unreachable!(),
                };
                state = s;
            }
            out[wet] += prob;
        }
    }
    out
}

/// Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        // Chebyshev-based initial guess, then Newton on P_n
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        loop {
            let (p, dp) = legendre_and_derivative(n, z);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_and_derivative(n, z);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Quadrature oracle for the Hermite coefficient integral
/// g_k = (1/k!)∫ G(t)·H_k(t)·φ(t) dt with G the step transform of the
/// marginal: 200-node Gauss–Legendre panels between consecutive CDF
/// breakpoints (where the integrand is analytic), the tail panel cut at
/// |t| = 40 where φ vanishes to double precision.
pub fn gk_quadrature_oracle(marginal: &MarginalSpec, nu: u32, k: usize) -> f64 {
    let table = marginal.cdf_table(nu).unwrap();
    let (gl_nodes, gl_weights) = gauss_legendre(200);
    let mut breaks: Vec<f64> = vec![-40.0];
    for &c in &table {
        if c > 0.0 && c < CDF_CUTOFF {
            breaks.push(percount::normal::quantile(c));
        }
    }
    breaks.push(40.0);

    let mut total = 0.0;
    for (seg, pair) in breaks.windows(2).enumerate() {
        let value = seg as f64; // G(t) = number of breakpoints below t
        if value == 0.0 {
            continue;
        }
        let (a, b) = (pair[0], pair[1]);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut panel = 0.0;
        for (&x, &w) in gl_nodes.iter().zip(&gl_weights) {
            let t = mid + half * x;
            panel += w * hermite(k, t) * percount::normal::pdf(t);
        }
        total += value * panel * half;
    }
    let factorial: f64 = (1..=k).map(|i| i as f64).product();
    total / factorial
}

/// Probabilists' Hermite polynomial (local copy so the oracle does not lean
/// on the module under test).
pub fn hermite(k: usize, x: f64) -> f64 {
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

/// Upper-tail chi-square p-value.
pub fn chi_square_pvalue(statistic: f64, dof: usize) -> f64 {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    1.0 - ChiSquared::new(dof as f64).unwrap().cdf(statistic)
}

/// Mean and sample standard deviation.
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
