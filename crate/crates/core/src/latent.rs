//! Standardized latent Gaussian processes: white noise, AR(1), PAR(1), and
//! SAR(1) with AR(1) noise. All are scaled so Var(Z_t) ≡ 1; the module
//! provides validation, exact autocorrelations, one-step-ahead predictors,
//! and exact simulation.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{season_of, FourierCurve};
use crate::normal;

/// Latent process specification, standardized to unit variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LatentSpec {
    /// Independent standard normals.
    WhiteNoise { period: u32 },
    /// Z_t = φ Z_{t−1} + ε_t √(1−φ²), |φ| < 1.
    Ar1 { phi: f64, period: u32 },
    /// Z_t = φ(ν_t) Z_{t−1} + ε_t √(1−φ(ν_t)²) with a periodic coefficient
    /// curve; causal when |∏_ν φ(ν)| < 1 and standardizable when |φ(ν)| < 1
    /// for every season.
    Par1 { phi: FourierCurve },
    /// Z_t = φ Z_{t−T} + η_t with AR(1) noise η_t = α η_{t−1} + ε_t;
    /// |φ| < 1, |α| < 1. Equivalent to a stationary AR(T+1).
    Sar1 { phi: f64, alpha: f64, period: u32 },
}

/// One-step conditional mean and standard deviation of Z_t given its past.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Predictor {
    pub mean: f64,
    pub sd: f64,
}

impl LatentSpec {
    pub fn period(&self) -> u32 {
        match self {
            LatentSpec::WhiteNoise { period }
            | LatentSpec::Ar1 { period, .. }
            | LatentSpec::Sar1 { period, .. } => *period,
            LatentSpec::Par1 { phi } => phi.period(),
        }
    }

    /// Accept iff the causality and unit-variance invariants hold.
    pub fn validate(&self) -> Result<()> {
        match self {
            LatentSpec::WhiteNoise { period } => {
                if *period == 0 {
                    return Err(Error::invalid("period must be >= 1"));
                }
            }
            LatentSpec::Ar1 { phi, period } => {
                if *period == 0 {
                    return Err(Error::invalid("period must be >= 1"));
                }
                if !(phi.abs() < 1.0) {
                    return Err(Error::invalid(format!("AR(1) needs |phi| < 1, got {phi}")));
                }
            }
            LatentSpec::Par1 { phi } => {
                let mut product = 1.0;
                for nu in 1..=phi.period() {
                    let v = phi.value(nu);
                    if !(1.0 - v * v > 0.0) {
                        return Err(Error::invalid(format!(
                            "PAR(1) innovation variance 1-phi({nu})^2 = {} not positive",
                            1.0 - v * v
                        )));
                    }
                    product *= v;
                }
                if !(product.abs() < 1.0) {
                    return Err(Error::invalid(format!(
                        "PAR(1) needs |prod phi(nu)| < 1 over a cycle, got {product}"
                    )));
                }
            }
            LatentSpec::Sar1 { phi, alpha, period } => {
                if *period == 0 {
                    return Err(Error::invalid("period must be >= 1"));
                }
                if !(phi.abs() < 1.0) {
                    return Err(Error::invalid(format!("SAR(1) needs |phi| < 1, got {phi}")));
                }
                if !(alpha.abs() < 1.0) {
                    return Err(Error::invalid(format!(
                        "SAR(1) noise needs |alpha| < 1, got {alpha}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Innovation standard deviation at (1-based) time t, i.e. the one-step
    /// conditional sd once the process is past its startup.
    pub fn innovation_sd(&self, t: usize) -> f64 {
        match self {
            LatentSpec::WhiteNoise { .. } => 1.0,
            LatentSpec::Ar1 { phi, .. } => (1.0 - phi * phi).sqrt(),
            LatentSpec::Par1 { phi } => {
                let v = phi.value(season_of(t, phi.period()));
                (1.0 - v * v).sqrt()
            }
            LatentSpec::Sar1 { phi, alpha, period } => {
                sar1_sigma_eps2(*phi, *alpha, *period).sqrt()
            }
        }
    }

    /// Exact autocorrelation Corr(Z_t, Z_s); symmetric, acf(t,t) = 1.
    pub fn acf(&self, t: usize, s: usize) -> f64 {
        if t == s {
            return 1.0;
        }
        let (hi, lo) = if t > s { (t, s) } else { (s, t) };
        match self {
            LatentSpec::WhiteNoise { .. } => 0.0,
            LatentSpec::Ar1 { phi, .. } => phi.powi((hi - lo) as i32),
            LatentSpec::Par1 { phi } => {
                let mut acc = 1.0;
                for i in 0..(hi - lo) {
                    acc *= phi.value(season_of(hi - i, phi.period()));
                }
                acc
            }
            LatentSpec::Sar1 { phi, alpha, period } => {
                sar1_acf(*phi, *alpha, *period, hi - lo)
            }
        }
    }

    /// Precompute season tables and startup coefficients for prediction.
    pub fn predictor(&self) -> Result<LatentPredictor> {
        LatentPredictor::new(self)
    }

    /// Exact draw of Z_1..Z_n: z_t = ẑ_t + r_t ε_t with iid standard normal
    /// ε_t generated by inverse CDF from a seeded stream (bit-reproducible).
    pub fn simulate(&self, n: usize, seed: u64) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::domain("simulation length must be >= 1"));
        }
        let pred = self.predictor()?;
        let mut hist = History::new(pred.depth());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(n);
        for t in 1..=n {
            let p = pred.predict(t, &hist);
            let eps = normal::quantile(uniform_open01(&mut rng));
            let z = p.mean + p.sd * eps;
            hist.push(z);
            out.push(z);
        }
        Ok(out)
    }
}

/// Innovation variance σ²_ε that standardizes the SAR(1)+AR(1) system:
/// σ²_ε = (1−φ²)(1−α²)(1−φα^T)/(1+φα^T).
fn sar1_sigma_eps2(phi: f64, alpha: f64, period: u32) -> f64 {
    let at = alpha.powi(period as i32);
    (1.0 - phi * phi) * (1.0 - alpha * alpha) * (1.0 - phi * at) / (1.0 + phi * at)
}

/// Stationary ACF of the standardized SAR(1)+AR(1) process.
///
/// For 0 <= h <= T:  ρ(h) = (α^h + φ α^{T−h}) / (1 + φ α^T).
/// For h > T the Yule–Walker recursion ρ(h) = φ ρ(h−T) + Cov(η_t, Z_{t−h})
/// unrolls to
///   ρ(h) = φ^a ρ(b) + (1−φ²)/(1+φα^T) · Σ_{k=0}^{a−1} φ^k α^{h−Tk},
/// with a = ⌊h/T⌋ and b = h − aT.
fn sar1_acf(phi: f64, alpha: f64, period: u32, h: usize) -> f64 {
    let t = period as usize;
    let at = alpha.powi(period as i32);
    let denom = 1.0 + phi * at;
    if h <= t {
        return (alpha.powi(h as i32) + phi * alpha.powi((t - h) as i32)) / denom;
    }
    let a = h / t;
    let b = h - a * t;
    let base = (alpha.powi(b as i32) + phi * alpha.powi((t - b) as i32)) / denom;
    let mut tail = 0.0;
    let scale = (1.0 - phi * phi) / denom;
    for k in 0..a {
        tail += phi.powi(k as i32) * alpha.powi((h - t * k) as i32);
    }
    phi.powi(a as i32) * base + scale * tail
}

/// Rolling window of the most recent latent values, sized to the predictor's
/// required depth.
#[derive(Debug, Clone)]
pub struct History {
    buf: Vec<f64>,
    len: usize,
    head: usize,
}

impl History {
    pub fn new(depth: usize) -> Self {
        Self {
            buf: vec![0.0; depth.max(1)],
            len: 0,
            head: 0,
        }
    }

    #[inline]
    pub fn push(&mut self, z: f64) {
        let cap = self.buf.len();
        self.buf[self.head] = z;
        self.head = (self.head + 1) % cap;
        if self.len < cap {
            self.len += 1;
        }
    }

    /// Number of stored values (saturates at the window depth).
    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// z_{t−back}, with back = 1 the most recent value.
    #[inline]
    pub fn back(&self, back: usize) -> f64 {
        debug_assert!(back >= 1 && back <= self.len);
        let cap = self.buf.len();
        self.buf[(self.head + cap - back) % cap]
    }
}

/// Precomputed prediction machinery for a validated latent spec.
#[derive(Debug, Clone)]
pub struct LatentPredictor {
    kind: PredictorKind,
    period: u32,
}

#[derive(Debug, Clone)]
enum PredictorKind {
    WhiteNoise,
    Ar1 {
        phi: f64,
        sd: f64,
    },
    Par1 {
        /// φ(ν) and √(1−φ(ν)²) indexed by ν−1.
        phi: Vec<f64>,
        sd: Vec<f64>,
    },
    Sar1 {
        phi: f64,
        alpha: f64,
        sigma_eps: f64,
        /// Durbin–Levinson rows: startup[j] holds the j coefficients for
        /// predicting from j past values (j = 1..=T), most recent first.
        startup: Vec<Vec<f64>>,
        /// One-step prediction sd for history length j (index j = 0..=T).
        startup_sd: Vec<f64>,
    },
}

impl LatentPredictor {
    pub fn new(spec: &LatentSpec) -> Result<Self> {
        spec.validate()?;
        let period = spec.period();
        let kind = match spec {
            LatentSpec::WhiteNoise { .. } => PredictorKind::WhiteNoise,
            LatentSpec::Ar1 { phi, .. } => PredictorKind::Ar1 {
                phi: *phi,
                sd: (1.0 - phi * phi).sqrt(),
            },
            LatentSpec::Par1 { phi } => {
                let values = phi.values();
                let sd = values.iter().map(|v| (1.0 - v * v).sqrt()).collect();
                PredictorKind::Par1 { phi: values, sd }
            }
            LatentSpec::Sar1 { phi, alpha, period } => {
                let t = *period as usize;
                let rho: Vec<f64> = (0..=t + 1).map(|h| sar1_acf(*phi, *alpha, *period, h)).collect();
                let (startup, startup_sd) = durbin_levinson(&rho, t)?;
                PredictorKind::Sar1 {
                    phi: *phi,
                    alpha: *alpha,
                    sigma_eps: sar1_sigma_eps2(*phi, *alpha, *period).sqrt(),
                    startup,
                    startup_sd,
                }
            }
        };
        Ok(Self { kind, period })
    }

    /// History depth the predictor needs.
    pub fn depth(&self) -> usize {
        match &self.kind {
            PredictorKind::WhiteNoise => 0,
            PredictorKind::Ar1 { .. } | PredictorKind::Par1 { .. } => 1,
            PredictorKind::Sar1 { .. } => self.period as usize + 1,
        }
    }

    /// One-step predictor of Z_t given the history window. `hist` must hold
    /// min(t−1, depth) values, the most recent being z_{t−1}.
    pub fn predict(&self, t: usize, hist: &History) -> Predictor {
        match &self.kind {
            PredictorKind::WhiteNoise => Predictor { mean: 0.0, sd: 1.0 },
            PredictorKind::Ar1 { phi, sd } => {
                if hist.is_empty() {
                    Predictor { mean: 0.0, sd: 1.0 }
                } else {
                    Predictor {
                        mean: phi * hist.back(1),
                        sd: *sd,
                    }
                }
            }
            PredictorKind::Par1 { phi, sd } => {
                if hist.is_empty() {
                    Predictor { mean: 0.0, sd: 1.0 }
                } else {
                    let idx = (season_of(t, self.period) - 1) as usize;
                    Predictor {
                        mean: phi[idx] * hist.back(1),
                        sd: sd[idx],
                    }
                }
            }
            PredictorKind::Sar1 {
                phi,
                alpha,
                sigma_eps,
                startup,
                startup_sd,
            } => {
                let t_per = self.period as usize;
                let j = hist.len().min(t - 1);
                if j == 0 {
                    Predictor { mean: 0.0, sd: 1.0 }
                } else if j <= t_per {
                    let coeffs = &startup[j];
                    let mut mean = 0.0;
                    for (i, c) in coeffs.iter().enumerate() {
                        mean += c * hist.back(i + 1);
                    }
                    Predictor {
                        mean,
                        sd: startup_sd[j],
                    }
                } else {
                    // AR(T+1) recast: Z_t = αZ_{t−1} + φZ_{t−T} − αφZ_{t−T−1} + ε_t
                    Predictor {
                        mean: alpha * hist.back(1) + phi * hist.back(t_per)
                            - alpha * phi * hist.back(t_per + 1),
                        sd: *sigma_eps,
                    }
                }
            }
        }
    }
}

/// Durbin–Levinson on an ACF: returns prediction coefficient rows for history
/// lengths 1..=max_order (most recent value first) and the one-step
/// prediction standard deviations indexed by history length 0..=max_order.
fn durbin_levinson(rho: &[f64], max_order: usize) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    debug_assert!(rho.len() > max_order);
    let mut rows: Vec<Vec<f64>> = vec![Vec::new()];
    let mut sd = vec![1.0_f64];
    let mut v = 1.0; // prediction error variance
    let mut prev: Vec<f64> = Vec::new();
    for j in 1..=max_order {
        let mut acc = rho[j];
        for (i, c) in prev.iter().enumerate() {
            acc -= c * rho[j - 1 - i];
        }
        let refl = acc / v;
        let mut row = Vec::with_capacity(j);
        for i in 0..j - 1 {
            row.push(prev[i] - refl * prev[j - 2 - i]);
        }
        row.push(refl);
        v *= 1.0 - refl * refl;
        if !(v > 0.0) {
            return Err(Error::Degenerate(format!(
                "prediction error variance vanished at startup step {j}"
            )));
        }
        sd.push(v.sqrt());
        prev = row.clone();
        rows.push(row);
    }
    Ok((rows, sd))
}

/// Uniform in the open interval (0,1) from a 53-bit draw.
#[inline]
pub(crate) fn uniform_open01(rng: &mut impl RngCore) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sar(phi: f64, alpha: f64, period: u32) -> LatentSpec {
        LatentSpec::Sar1 { phi, alpha, period }
    }

    fn par1_curve(b1: f64, b2: f64, b3: f64, period: u32) -> LatentSpec {
        LatentSpec::Par1 {
            phi: FourierCurve::new(b1, b2, b3, period).unwrap(),
        }
    }

    #[test]
    fn validation_examples() {
        assert!(par1_curve(1.0, 0.0, 0.0, 10).validate().is_err());
        assert!(sar(0.5, 0.3, 10).validate().is_ok());
        assert!(par1_curve(0.5, 0.2, 5.0, 10).validate().is_ok());
        assert!(LatentSpec::Ar1 { phi: 1.0, period: 4 }.validate().is_err());
        assert!(sar(0.5, 1.0, 10).validate().is_err());
    }

    #[test]
    fn innovation_sd_reductions() {
        assert!((LatentSpec::Ar1 { phi: 0.0, period: 4 }.innovation_sd(3) - 1.0).abs() < 1e-15);
        assert!((sar(0.0, 0.0, 4).innovation_sd(3) - 1.0).abs() < 1e-15);
        let expected = (0.75_f64 * 0.91 * (1.0 - 0.5 * 0.0081) / (1.0 + 0.5 * 0.0081)).sqrt();
        assert!((sar(0.5, 0.3, 4).innovation_sd(3) - expected).abs() < 1e-15);
    }

    #[test]
    fn sar1_acf_reductions() {
        // alpha = 0: pure seasonal AR
        let s = sar(0.5, 0.0, 6);
        assert!((s.acf(7, 1) - 0.5).abs() < 1e-15);
        for h in 1..6 {
            assert!(s.acf(1 + h, 1).abs() < 1e-15, "h={h}");
        }
        // phi = 0: AR(1) in the noise
        let s = sar(0.0, 0.4, 6);
        for h in 1..20usize {
            assert!((s.acf(1 + h, 1) - 0.4f64.powi(h as i32)).abs() < 1e-14);
        }
        // spec'd value at phi=0.5, alpha=0.3, T=4, h=2
        let s = sar(0.5, 0.3, 4);
        assert!((s.acf(3, 1) - 0.135 / 1.00405).abs() < 1e-10);
    }

    #[test]
    fn sar1_acf_matches_ma_infinity_truncation() {
        for &phi in &[0.5, -0.5, 0.3, -0.3] {
            for &alpha in &[0.5, -0.5, 0.3, -0.3] {
                let period = 4u32;
                let s = sar(phi, alpha, period);
                for h in 0..=(3 * period as usize) {
                    let oracle = ma_infinity_acf(phi, alpha, period as usize, h);
                    let ours = s.acf(1 + h, 1);
                    assert!(
                        (ours - oracle).abs() < 1e-8,
                        "phi={phi} alpha={alpha} h={h}: {ours} vs {oracle}"
                    );
                }
            }
        }
    }

    /// Independent MA(∞) route: Z_t = Σ_m φ^m η_{t−mT}, η causal AR(1).
    fn ma_infinity_acf(phi: f64, alpha: f64, period: usize, h: usize) -> f64 {
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
            if s.abs() < 1e-14 && u > 10 * period + h {
                break;
            }
            u += 1;
            if u > 100_000 {
                break;
            }
        }
        let var: f64 = psi.iter().map(|p| p * p).sum();
        let cov: f64 = (h..psi.len()).map(|i| psi[i] * psi[i - h]).sum();
        cov / var
    }

    #[test]
    fn par1_constant_curve_reduces_to_ar1() {
        let s = par1_curve(0.6, 0.0, 0.0, 5);
        for h in 1..12usize {
            assert!((s.acf(3 + h, 3) - 0.6f64.powi(h as i32)).abs() < 1e-14);
        }
    }

    #[test]
    fn predictors_at_startup_and_steady_state() {
        let pred = LatentSpec::Ar1 { phi: 0.5, period: 4 }.predictor().unwrap();
        let mut h = History::new(pred.depth());
        let p = pred.predict(1, &h);
        assert_eq!((p.mean, p.sd), (0.0, 1.0));
        h.push(2.0);
        let p = pred.predict(2, &h);
        assert!((p.mean - 1.0).abs() < 1e-15);
        assert!((p.sd - 0.75_f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn sar1_startup_matches_lag_one_projection() {
        let spec = sar(0.5, 0.3, 4);
        let pred = spec.predictor().unwrap();
        let mut h = History::new(pred.depth());
        h.push(1.7);
        let p = pred.predict(2, &h);
        let rho1 = spec.acf(2, 1);
        assert!((p.mean - rho1 * 1.7).abs() < 1e-12);
        assert!((p.sd - (1.0 - rho1 * rho1).sqrt()).abs() < 1e-12);
    }

    /// The sequential predictors must reproduce the Cholesky factorization of
    /// the ACF matrix: the conditional sd at step t is the t-th pivot, and the
    /// conditional mean coefficients are the regression row.
    #[test]
    fn predictor_matches_cholesky_construction() {
        let specs = vec![
            LatentSpec::WhiteNoise { period: 5 },
            LatentSpec::Ar1 { phi: 0.7, period: 5 },
            par1_curve(0.5, 0.2, 5.0, 10),
            sar(0.5, 0.3, 4),
            sar(-0.4, 0.25, 12),
        ];
        let n = 30;
        for spec in specs {
            let pred = spec.predictor().unwrap();
            // Gram matrix of the first n values
            let mut cov = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in 0..n {
                    cov[i][j] = spec.acf(i + 1, j + 1);
                }
            }
            let chol = cholesky(&cov);
            // simulate an arbitrary path and compare conditional moments
            let z = spec.simulate(n, 99).unwrap();
            let mut hist = History::new(pred.depth());
            for (t0, &zt) in z.iter().enumerate() {
                let t = t0 + 1;
                let p = pred.predict(t, &hist);
                let (chol_mean, chol_sd) = chol_predict(&chol, &z, t0);
                assert!(
                    (p.mean - chol_mean).abs() < 1e-10,
                    "{spec:?} t={t}: mean {} vs {}",
                    p.mean,
                    chol_mean
                );
                assert!(
                    (p.sd - chol_sd).abs() < 1e-10,
                    "{spec:?} t={t}: sd {} vs {}",
                    p.sd,
                    chol_sd
                );
                hist.push(zt);
            }
        }
    }

    fn cholesky(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let n = a.len();
        let mut l = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..=i {
                let mut sum = a[i][j];
                for k in 0..j {
                    sum -= l[i][k] * l[j][k];
                }
                if i == j {
                    l[i][j] = sum.sqrt();
                } else {
                    l[i][j] = sum / l[j][j];
                }
            }
        }
        l
    }

    /// Conditional mean/sd of Z_{t0+1} given z_1..z_{t0} via the Cholesky
    /// factor: solve L e = z for the innovations, then the conditional mean is
    /// Σ_k L[t0][k] e_k and the sd is L[t0][t0].
    fn chol_predict(l: &[Vec<f64>], z: &[f64], t0: usize) -> (f64, f64) {
        let mut e = vec![0.0; t0];
        for i in 0..t0 {
            let mut sum = z[i];
            for k in 0..i {
                sum -= l[i][k] * e[k];
            }
            e[i] = sum / l[i][i];
        }
        let mean: f64 = (0..t0).map(|k| l[t0][k] * e[k]).sum();
        (mean, l[t0][t0])
    }

    #[test]
    fn simulation_is_reproducible_and_standardized() {
        let spec = sar(0.5, 0.3, 4);
        let a = spec.simulate(200, 7).unwrap();
        let b = spec.simulate(200, 7).unwrap();
        assert_eq!(a, b);
        let c = spec.simulate(200, 8).unwrap();
        assert_ne!(a, c);

        // Var(Z_t) ≡ 1 within 3 monte-carlo standard errors at n = 10^6.
        for spec in [
            LatentSpec::WhiteNoise { period: 10 },
            LatentSpec::Ar1 { phi: 0.5, period: 10 },
            par1_curve(0.5, 0.2, 5.0, 10),
            sar(0.5, 0.3, 10),
        ] {
            let n = 1_000_000;
            let z = spec.simulate(n, 42).unwrap();
            let mean: f64 = z.iter().sum::<f64>() / n as f64;
            let var: f64 = z.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
            // conservative SE for the sample variance of a correlated
            // Gaussian series: sqrt(2/n)·(1 + 2Σρ(h)²)^(1/2) <= sqrt(2/n)·2
            let se = (2.0 / n as f64).sqrt() * 2.0;
            assert!((var - 1.0).abs() < 3.0 * se, "{spec:?}: var {var}");
        }
    }

    #[test]
    fn par1_seasonal_lag_one_correlations_match_curve() {
        let curve = FourierCurve::new(0.5, 0.2, 5.0, 10).unwrap();
        let spec = LatentSpec::Par1 { phi: curve };
        let n = 1_000_000;
        let z = spec.simulate(n, 13).unwrap();
        let t_per = 10usize;
        for nu in 1..=t_per {
            // correlation between Z at season nu and Z one step before
            let mut num = 0.0;
            let mut d1 = 0.0;
            let mut d2 = 0.0;
            let mut count = 0;
            let mut t = if nu == 1 { t_per + 1 } else { nu };
            while t <= n {
                let a = z[t - 1];
                let b = z[t - 2];
                num += a * b;
                d1 += a * a;
                d2 += b * b;
                count += 1;
                t += t_per;
            }
            let corr = num / (d1.sqrt() * d2.sqrt());
            let expected = curve.value(nu as u32);
            let se = (1.0 / count as f64).sqrt();
            assert!(
                (corr - expected).abs() < 3.0 * se,
                "nu={nu}: {corr} vs {expected}"
            );
        }
    }

    #[test]
    fn acf_is_bounded_and_symmetric() {
        let specs = vec![
            LatentSpec::Ar1 { phi: 0.9, period: 3 },
            par1_curve(0.5, 0.2, 5.0, 10),
            sar(0.5, 0.3, 4),
        ];
        for spec in specs {
            for t in 1..40 {
                for s in 1..40 {
                    let v = spec.acf(t, s);
                    assert!((v - spec.acf(s, t)).abs() < 1e-14);
                    if t == s {
                        assert_eq!(v, 1.0);
                    } else {
                        assert!(v.abs() < 1.0, "{spec:?} t={t} s={s}: {v}");
                    }
                }
            }
        }
    }
}
