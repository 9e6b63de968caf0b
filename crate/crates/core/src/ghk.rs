//! GHK sequential importance sampler for the model likelihood — an
//! n-dimensional Gaussian rectangle probability — with common random numbers,
//! log-space weights, and per-time predictive CDF extraction for PIT
//! diagnostics.
//!
//! Common random numbers: particle k draws its time-t uniform from a
//! dedicated ChaCha stream, so u_{t,k} is a pure function of
//! (crn_seed, t, k) and never of the model parameters. For a fixed seed the
//! estimated likelihood is then a smooth function of the parameters.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::latent::{uniform_open01, History, LatentPredictor, LatentSpec};
use crate::marginals::MarginalSpec;
use crate::normal;
use crate::simulate::CountSeries;

/// Integration rectangle (a_t, b_t] per time step:
/// a_t = Φ⁻¹(C_{x_t−1}(s(t))), b_t = Φ⁻¹(C_{x_t}(s(t))).
#[derive(Debug, Clone)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// Map observed counts to latent-space bounds. Support violations are
/// reported with the offending 1-based time index.
pub fn bounds_from_data(marginal: &MarginalSpec, data: &CountSeries) -> Result<Bounds> {
    if marginal.period() != data.period {
        return Err(Error::invalid(format!(
            "marginal period {} disagrees with data period {}",
            marginal.period(),
            data.period
        )));
    }
    let n = data.len();
    let mut lower = Vec::with_capacity(n);
    let mut upper = Vec::with_capacity(n);
    for (t0, &x) in data.x.iter().enumerate() {
        let t = t0 + 1;
        let nu = data.season(t);
        if let Some(top) = marginal.support_top() {
            if x > top {
                return Err(Error::Data {
                    t,
                    message: format!("count {x} above the support maximum {top}"),
                });
            }
        }
        let c_hi = marginal.cdf(nu, x as i64)?;
        let c_lo = marginal.cdf(nu, x as i64 - 1)?;
        lower.push(normal::quantile(c_lo));
        upper.push(normal::quantile(c_hi));
    }
    Ok(Bounds { lower, upper })
}

/// A draw from a truncated normal; `degenerate` marks draws where the
/// interval probability underflowed and the value was clamped to the
/// midpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TnSample {
    pub value: f64,
    pub degenerate: bool,
}

/// Inverse-CDF draw from N(mean, sd²) conditioned on (lower, upper), driven
/// by the uniform u. Smooth in (mean, sd, lower, upper) for fixed u, which is
/// what makes common random numbers work.
pub fn sample_truncated_normal(
    mean: f64,
    sd: f64,
    lower: f64,
    upper: f64,
    u: f64,
) -> Result<TnSample> {
    if !(sd > 0.0) {
        return Err(Error::domain(format!("scale must be positive, got {sd}")));
    }
    if !(lower < upper) {
        return Err(Error::domain(format!(
            "empty truncation interval ({lower}, {upper})"
        )));
    }
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::domain(format!("uniform draw {u} outside (0,1)")));
    }
    let alpha = (lower - mean) / sd;
    let beta = (upper - mean) / sd;
    let (z, degenerate) = truncated_std_quantile(alpha, beta, u);
    Ok(TnSample {
        value: mean + sd * z,
        degenerate,
    })
}

/// Quantile of the standard normal truncated to (alpha, beta). Uses the
/// lower-tail CDF when the interval sits left of the origin and the
/// complementary CDF when it sits right, so deep-tail intervals keep
/// relative accuracy.
fn truncated_std_quantile(alpha: f64, beta: f64, u: f64) -> (f64, bool) {
    if alpha == f64::NEG_INFINITY && beta == f64::INFINITY {
        return (normal::quantile(u), false);
    }
    let ip = normal::interval_prob(alpha, beta);
    if !(ip > 0.0) {
        return (clamped_midpoint(alpha, beta), true);
    }
    let z = if beta == f64::INFINITY || (alpha != f64::NEG_INFINITY && alpha + beta > 0.0) {
        // right-leaning interval: invert through the upper tail
        let q = normal::sf(beta) + (1.0 - u) * ip;
        -normal::quantile(q)
    } else {
        let p = normal::cdf(alpha) + u * ip;
        normal::quantile(p)
    };
    if z.is_finite() {
        (z.clamp(alpha, beta), false)
    } else {
        (clamped_midpoint(alpha, beta), true)
    }
}

fn clamped_midpoint(alpha: f64, beta: f64) -> f64 {
    0.5 * (alpha.max(-39.0) + beta.min(39.0))
}

/// GHK estimate of the log-likelihood.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LikelihoodEstimate {
    pub loglik: f64,
    pub particles: usize,
    pub crn_seed: u64,
}

/// Filter pass output: the likelihood estimate plus the per-time predictive
/// CDF evaluations needed for PIT diagnostics,
/// P̂_t(y) = Σ_k W_{t−1}^(k) Φ((Φ⁻¹(C_y)−ẑ_t^(k))/r_t) at y = x_t−1 and x_t,
/// with W the self-normalized weights through time t−1.
#[derive(Debug, Clone)]
pub struct FilterPass {
    pub estimate: LikelihoodEstimate,
    /// P̂_t(x_t − 1) per t (1-based t at index t−1).
    pub pred_cdf_lower: Vec<f64>,
    /// P̂_t(x_t) per t.
    pub pred_cdf_upper: Vec<f64>,
}

/// Estimate log 𝓛(θ, η) by m-particle GHK. Deterministic for fixed
/// (parameters, data, m, seed): the particle reduction is a fixed-order
/// log-sum-exp no matter how the particle loop is scheduled.
pub fn ghk_loglik(
    marginal: &MarginalSpec,
    latent: &LatentSpec,
    data: &CountSeries,
    particles: usize,
    crn_seed: u64,
) -> Result<LikelihoodEstimate> {
    if particles == 0 {
        return Err(Error::domain("particle count must be >= 1"));
    }
    marginal.validate()?;
    let predictor = latent.predictor()?;
    let bounds = bounds_from_data(marginal, data)?;
    let n = data.len();

    let results: Vec<(f64, usize)> = (0..particles)
        .into_par_iter()
        .map(|k| run_particle(&predictor, &bounds, n, crn_seed, k as u64))
        .collect();

    let loglik = finalize_loglik(&results, particles)?;
    Ok(LikelihoodEstimate {
        loglik,
        particles,
        crn_seed,
    })
}

/// One pass that produces both the likelihood estimate and the per-time
/// predictive CDFs. Runs the particles sequentially: the per-time
/// normalization is accumulated with an online max-rescaled sum, which keeps
/// the output deterministic and the memory footprint at O(n).
pub fn filter_pass(
    marginal: &MarginalSpec,
    latent: &LatentSpec,
    data: &CountSeries,
    particles: usize,
    crn_seed: u64,
) -> Result<FilterPass> {
    if particles == 0 {
        return Err(Error::domain("particle count must be >= 1"));
    }
    marginal.validate()?;
    let predictor = latent.predictor()?;
    let bounds = bounds_from_data(marginal, data)?;
    let n = data.len();
    let depth = predictor.depth();

    let mut max_lw = vec![f64::NEG_INFINITY; n];
    let mut s_lo = vec![0.0_f64; n];
    let mut s_hi = vec![0.0_f64; n];
    let mut s_den = vec![0.0_f64; n];
    let mut finals: Vec<(f64, usize)> = Vec::with_capacity(particles);

    for k in 0..particles {
        let mut rng = ChaCha8Rng::seed_from_u64(crn_seed);
        rng.set_stream(k as u64);
        let mut hist = History::new(depth);
        let mut logw = 0.0_f64;
        let mut death = n + 1;
        for t in 1..=n {
            let p = predictor.predict(t, &hist);
            let alpha = (bounds.lower[t - 1] - p.mean) / p.sd;
            let beta = (bounds.upper[t - 1] - p.mean) / p.sd;
            let phi_lo = normal::cdf(alpha);
            let phi_hi = normal::cdf(beta);

            // accumulate this particle's predictive CDF contribution with its
            // weight through t−1
            if logw > max_lw[t - 1] {
                let rescale = (max_lw[t - 1] - logw).exp();
                s_lo[t - 1] *= rescale;
                s_hi[t - 1] *= rescale;
                s_den[t - 1] *= rescale;
                max_lw[t - 1] = logw;
            }
            let w = (logw - max_lw[t - 1]).exp();
            s_lo[t - 1] += w * phi_lo;
            s_hi[t - 1] += w * phi_hi;
            s_den[t - 1] += w;

            let ip = normal::interval_prob(alpha, beta);
            if !(ip > 0.0) {
                logw = f64::NEG_INFINITY;
                death = t;
                break;
            }
            logw += ip.ln();
            let u = uniform_open01(&mut rng);
            let (z, _) = truncated_std_quantile(alpha, beta, u);
            hist.push(p.mean + p.sd * z);
        }
        finals.push((logw, death));
    }

    let loglik = finalize_loglik(&finals, particles)?;
    let mut pred_cdf_lower = Vec::with_capacity(n);
    let mut pred_cdf_upper = Vec::with_capacity(n);
    for t in 0..n {
        if s_den[t] > 0.0 {
            pred_cdf_lower.push((s_lo[t] / s_den[t]).clamp(0.0, 1.0));
            pred_cdf_upper.push((s_hi[t] / s_den[t]).clamp(0.0, 1.0));
        } else {
            // no particle survived to t; the loglik error above will usually
            // fire first, but keep the vectors well-formed
            pred_cdf_lower.push(f64::NAN);
            pred_cdf_upper.push(f64::NAN);
        }
    }

    Ok(FilterPass {
        estimate: LikelihoodEstimate {
            loglik,
            particles,
            crn_seed,
        },
        pred_cdf_lower,
        pred_cdf_upper,
    })
}

/// PIT decomposition weights at one time step: the predictive probabilities
/// w_i = Φ((Φ⁻¹(C_i)−ẑ)/r) − Φ((Φ⁻¹(C_{i−1})−ẑ)/r) over the support; the
/// final entry absorbs any remaining tail so the vector sums to one.
pub fn pit_weights(marginal: &MarginalSpec, nu: u32, zhat: f64, r: f64) -> Result<Vec<f64>> {
    if !(r > 0.0) {
        return Err(Error::domain(format!("prediction sd must be positive: {r}")));
    }
    let table = marginal.cdf_table(nu)?;
    let mut out = Vec::with_capacity(table.len() + 1);
    let mut prev = 0.0; // Φ((Φ⁻¹(0)−ẑ)/r) = 0
    for &c in &table {
        let cur = if c >= 1.0 {
            1.0
        } else {
            normal::cdf((normal::quantile(c) - zhat) / r)
        };
        out.push((cur - prev).max(0.0));
        prev = cur;
    }
    if prev < 1.0 {
        out.push(1.0 - prev);
    }
    Ok(out)
}

fn run_particle(
    predictor: &LatentPredictor,
    bounds: &Bounds,
    n: usize,
    crn_seed: u64,
    stream: u64,
) -> (f64, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(crn_seed);
    rng.set_stream(stream);
    let mut hist = History::new(predictor.depth());
    let mut logw = 0.0_f64;
    for t in 1..=n {
        let p = predictor.predict(t, &hist);
        let alpha = (bounds.lower[t - 1] - p.mean) / p.sd;
        let beta = (bounds.upper[t - 1] - p.mean) / p.sd;
        let ip = normal::interval_prob(alpha, beta);
        if !(ip > 0.0) {
            return (f64::NEG_INFINITY, t);
        }
        logw += ip.ln();
        let u = uniform_open01(&mut rng);
        let (z, _) = truncated_std_quantile(alpha, beta, u);
        hist.push(p.mean + p.sd * z);
    }
    (logw, n + 1)
}

/// Fixed-order log-sum-exp of the particle weights minus log m. Errors if
/// every particle collapsed, reporting the furthest time reached.
fn finalize_loglik(results: &[(f64, usize)], particles: usize) -> Result<f64> {
    let max = results
        .iter()
        .map(|&(lw, _)| lw)
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        let t = results.iter().map(|&(_, d)| d).max().unwrap_or(1);
        return Err(Error::LikelihoodUnderflow { t });
    }
    let sum: f64 = results.iter().map(|&(lw, _)| (lw - max).exp()).sum();
    Ok(max + sum.ln() - (particles as f64).ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::FourierCurve;
    use rand::Rng;

    fn poisson(level: f64, period: u32) -> MarginalSpec {
        MarginalSpec::Poisson {
            lambda: FourierCurve::constant(level, period).unwrap(),
        }
    }

    fn series(x: Vec<u32>, period: u32) -> CountSeries {
        CountSeries::new(x, period).unwrap()
    }

    #[test]
    fn bounds_examples() {
        let m = poisson(1.0, 10);
        let b = bounds_from_data(&m, &series(vec![0], 10)).unwrap();
        assert_eq!(b.lower[0], f64::NEG_INFINITY);
        assert!((normal::cdf(b.upper[0]) - (-1.0f64).exp()).abs() < 1e-12);

        let b = bounds_from_data(&m, &series(vec![1], 10)).unwrap();
        assert!((normal::cdf(b.lower[0]) - 0.367_879_441_171_442_33).abs() < 1e-9);
        assert!((normal::cdf(b.upper[0]) - 0.735_758_882_342_884_7).abs() < 1e-9);

        let bin = MarginalSpec::Binomial {
            p: FourierCurve::constant(0.4, 10).unwrap(),
        };
        let b = bounds_from_data(&bin, &series(vec![7], 10)).unwrap();
        assert_eq!(b.upper[0], f64::INFINITY);
        match bounds_from_data(&bin, &series(vec![8], 10)) {
            Err(Error::Data { t, .. }) => assert_eq!(t, 1),
            other => panic!("expected data error, got {other:?}"),
        }
    }

    #[test]
    fn truncated_normal_median_and_edges() {
        let s = sample_truncated_normal(0.0, 1.0, f64::NEG_INFINITY, f64::INFINITY, 0.5).unwrap();
        assert!(s.value.abs() < 1e-14 && !s.degenerate);
        // lower edge of (0, ∞): u → 0⁺ pushes the draw to 0⁺
        let s = sample_truncated_normal(0.0, 1.0, 0.0, f64::INFINITY, 1e-12).unwrap();
        assert!(s.value > 0.0 && s.value < 1e-5, "{}", s.value);
        // invalid inputs
        assert!(sample_truncated_normal(0.0, 0.0, 0.0, 1.0, 0.5).is_err());
        assert!(sample_truncated_normal(0.0, 1.0, 1.0, 1.0, 0.5).is_err());
        assert!(sample_truncated_normal(0.0, 1.0, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn truncated_normal_deep_tail_stays_inside() {
        // interval far in the upper tail exercises the complementary branch
        for &u in &[1e-9, 0.2, 0.5, 0.8, 1.0 - 1e-9] {
            let s = sample_truncated_normal(0.0, 1.0, 10.0, 10.5, u).unwrap();
            assert!(
                s.value >= 10.0 && s.value <= 10.5 && !s.degenerate,
                "u={u}: {s:?}"
            );
        }
        // underflowed interval: clamped midpoint, flagged
        let s = sample_truncated_normal(0.0, 1.0, 40.0, 41.0, 0.5).unwrap();
        assert!(s.degenerate);
        assert!(s.value >= 39.0 && s.value <= 41.0);
    }

    #[test]
    fn truncated_normal_matches_cdf_by_ks() {
        // KS distance between 1e5 inverse-CDF draws and the target CDF
        let (a, b) = (-0.7, 1.3);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut draws: Vec<f64> = (0..100_000)
            .map(|_| {
                sample_truncated_normal(0.3, 0.8, a, b, rng.gen_range(1e-12..1.0))
                    .unwrap()
                    .value
            })
            .collect();
        draws.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let lo = normal::cdf((a - 0.3) / 0.8);
        let hi = normal::cdf((b - 0.3) / 0.8);
        let mut ks = 0.0_f64;
        for (i, &z) in draws.iter().enumerate() {
            let f = (normal::cdf((z - 0.3) / 0.8) - lo) / (hi - lo);
            let emp_hi = (i + 1) as f64 / draws.len() as f64;
            let emp_lo = i as f64 / draws.len() as f64;
            ks = ks.max((f - emp_lo).abs()).max((f - emp_hi).abs());
        }
        assert!(ks < 0.01, "KS = {ks}");
    }

    #[test]
    fn crn_draws_are_smooth_in_the_mean() {
        // fixed u: the draw moves continuously with the location
        let u = 0.37;
        let base = sample_truncated_normal(0.0, 1.0, -1.0, 2.0, u).unwrap().value;
        let moved = sample_truncated_normal(1e-6, 1.0, -1.0, 2.0, u).unwrap().value;
        assert!((moved - base).abs() < 1e-4);
    }

    #[test]
    fn single_point_likelihood_is_exact_for_any_m() {
        let m = poisson(1.0, 10);
        let l = LatentSpec::Ar1 { phi: 0.6, period: 10 };
        let data = series(vec![0], 10);
        for particles in [1, 7, 100] {
            let est = ghk_loglik(&m, &l, &data, particles, 5).unwrap();
            assert!(
                (est.loglik - (-1.0)).abs() < 1e-12,
                "m={particles}: {}",
                est.loglik
            );
        }
    }

    #[test]
    fn white_noise_likelihood_equals_pmf_product() {
        let m = MarginalSpec::Poisson {
            lambda: FourierCurve::new(4.0, 2.0, 1.0, 6).unwrap(),
        };
        let l = LatentSpec::WhiteNoise { period: 6 };
        let data = series(vec![3, 0, 5, 2, 7, 4, 1, 2, 3, 6, 0, 4], 6);
        let est = ghk_loglik(&m, &l, &data, 25, 11).unwrap();
        let direct: f64 = data
            .x
            .iter()
            .enumerate()
            .map(|(t0, &x)| m.pmf(data.season(t0 + 1), x).unwrap().ln())
            .sum();
        assert!((est.loglik - direct).abs() < 1e-12, "{} vs {direct}", est.loglik);
    }

    #[test]
    fn deterministic_given_seed_and_sensitive_to_it() {
        let m = poisson(3.0, 10);
        let l = LatentSpec::Ar1 { phi: 0.5, period: 10 };
        let data = series(vec![2, 3, 4, 1, 3, 5, 2, 2, 3, 4], 10);
        let a = ghk_loglik(&m, &l, &data, 200, 7).unwrap();
        let b = ghk_loglik(&m, &l, &data, 200, 7).unwrap();
        assert_eq!(a.loglik.to_bits(), b.loglik.to_bits());
        let c = ghk_loglik(&m, &l, &data, 200, 8).unwrap();
        assert_ne!(a.loglik, c.loglik);
    }

    #[test]
    fn crn_makes_the_loglik_smooth_in_parameters() {
        let data = series(vec![2, 3, 4, 1, 3, 5, 2, 2, 3, 4, 2, 1], 4);
        let eval = |phi: f64| {
            let m = poisson(3.0, 4);
            let l = LatentSpec::Ar1 { phi, period: 4 };
            ghk_loglik(&m, &l, &data, 300, 42).unwrap().loglik
        };
        let d1 = (eval(0.5 + 1e-5) - eval(0.5 - 1e-5)) / 2e-5;
        let d2 = (eval(0.5 + 5e-6) - eval(0.5 - 5e-6)) / 1e-5;
        assert!(
            (d1 - d2).abs() < 1e-2 * d1.abs().max(1.0),
            "finite differences unstable: {d1} vs {d2}"
        );
    }

    #[test]
    fn unbiasedness_proxy_against_high_m_reference() {
        let m = poisson(3.0, 10);
        let l = LatentSpec::Ar1 { phi: 0.5, period: 10 };
        let data = crate::simulate::simulate_counts(&m, &l, 50, 314).unwrap();

        let reference = ghk_loglik(&m, &l, &data, 100_000, 1).unwrap().loglik;
        let runs = 200;
        let mut liks = Vec::with_capacity(runs);
        for seed in 0..runs {
            let est = ghk_loglik(&m, &l, &data, 500, 1000 + seed as u64).unwrap();
            liks.push((est.loglik - reference).exp());
        }
        // mean of L-hat / L-ref should be 1 within 3 standard errors
        let mean: f64 = liks.iter().sum::<f64>() / runs as f64;
        let var: f64 =
            liks.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (runs as f64 - 1.0);
        let se = (var / runs as f64).sqrt();
        assert!(
            (mean - 1.0).abs() < 3.0 * se,
            "mean ratio {mean}, se {se}"
        );
    }

    #[test]
    fn true_model_outscores_perturbed_model_on_average() {
        let truth = poisson(3.0, 10);
        let perturbed = poisson(4.2, 10);
        let l = LatentSpec::Ar1 { phi: 0.5, period: 10 };
        let mut wins = 0;
        let runs = 30;
        for seed in 0..runs {
            let data = crate::simulate::simulate_counts(&truth, &l, 50, 600 + seed).unwrap();
            let a = ghk_loglik(&truth, &l, &data, 300, seed).unwrap().loglik;
            let b = ghk_loglik(&perturbed, &l, &data, 300, seed).unwrap().loglik;
            if a > b {
                wins += 1;
            }
        }
        assert!(wins > runs * 3 / 4, "true model won only {wins}/{runs}");
    }

    #[test]
    fn pit_weights_reduce_to_pmf_under_white_noise() {
        let m = MarginalSpec::Tsmc {
            alpha: FourierCurve::constant(0.6, 10).unwrap(),
            beta: FourierCurve::constant(0.7, 10).unwrap(),
        };
        let w = pit_weights(&m, 1, 0.0, 1.0).unwrap();
        let pmf = m.pmf_vector(1).unwrap();
        for (k, &p) in pmf.iter().enumerate() {
            assert!((w[k] - p).abs() < 1e-12, "k={k}");
        }
        let total: f64 = w.iter().sum();
        assert!((total - 1.0).abs() < 1e-10);
        // shifted predictor still sums to one by telescoping
        let w = pit_weights(&poisson(6.0, 10), 1, 1.3, 0.7).unwrap();
        let total: f64 = w.iter().sum();
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn predictive_cdf_matches_rejection_sampling_oracle() {
        // 3-step AR(1)+Poisson model: P(X_3 <= y | x_1, x_2) by brute force
        let m = poisson(3.0, 10);
        let phi = 0.6;
        let l = LatentSpec::Ar1 { phi, period: 10 };
        let data = series(vec![2, 4, 3], 10);
        let pass = filter_pass(&m, &l, &data, 100_000, 3).unwrap();

        // brute force: simulate the latent chain directly, reject paths whose
        // first two counts disagree with the data
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        let sd = (1.0 - phi * phi).sqrt();
        let mut kept = 0u64;
        let mut hits_lower = 0u64; // X_3 <= x_3 − 1
        let mut hits_upper = 0u64; // X_3 <= x_3
        for _ in 0..10_000_000u64 {
            let z1 = normal::quantile(uniform_open01(&mut rng));
            let x1 = m.quantile(1, normal::cdf(z1)).unwrap();
            if x1 != 2 {
                continue;
            }
            let z2 = phi * z1 + sd * normal::quantile(uniform_open01(&mut rng));
            let x2 = m.quantile(2, normal::cdf(z2)).unwrap();
            if x2 != 4 {
                continue;
            }
            let z3 = phi * z2 + sd * normal::quantile(uniform_open01(&mut rng));
            let x3 = m.quantile(3, normal::cdf(z3)).unwrap();
            kept += 1;
            if x3 <= 2 {
                hits_lower += 1;
            }
            if x3 <= 3 {
                hits_upper += 1;
            }
        }
        let oracle_lower = hits_lower as f64 / kept as f64;
        let oracle_upper = hits_upper as f64 / kept as f64;
        assert!(
            (pass.pred_cdf_lower[2] - oracle_lower).abs() < 0.01,
            "lower: {} vs {oracle_lower}",
            pass.pred_cdf_lower[2]
        );
        assert!(
            (pass.pred_cdf_upper[2] - oracle_upper).abs() < 0.01,
            "upper: {} vs {oracle_upper}",
            pass.pred_cdf_upper[2]
        );
    }

    #[test]
    fn filter_pass_loglik_agrees_with_parallel_path() {
        let m = poisson(3.0, 10);
        let l = LatentSpec::Ar1 { phi: 0.5, period: 10 };
        let data = series(vec![2, 3, 4, 1, 3, 5, 2, 2, 3, 4], 10);
        let a = ghk_loglik(&m, &l, &data, 333, 9).unwrap();
        let b = filter_pass(&m, &l, &data, 333, 9).unwrap();
        assert_eq!(a.loglik.to_bits(), b.estimate.loglik.to_bits());
    }

    #[test]
    fn impossible_data_underflows_with_time_index() {
        // Poisson mean 0.05 makes a count of 60 so deep in the tail that the
        // CDF values collapse to 1 in double precision
        let m = poisson(0.05, 10);
        let l = LatentSpec::Ar1 { phi: 0.5, period: 10 };
        let data = series(vec![1, 60, 1], 10);
        match ghk_loglik(&m, &l, &data, 10, 1) {
            Err(Error::LikelihoodUnderflow { t }) => assert_eq!(t, 2),
            other => panic!("expected underflow, got {other:?}"),
        }
    }
}
