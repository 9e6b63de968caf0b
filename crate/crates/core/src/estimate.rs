//! Maximum simulated likelihood: bounded quasi-Newton optimization of the
//! CRN-smoothed GHK log-likelihood, Hessian-based standard errors, and
//! information criteria.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::FourierCurve;
use crate::ghk::ghk_loglik;
use crate::latent::LatentSpec;
use crate::marginals::MarginalSpec;
use crate::optim::{self, MinimizeOptions};
use crate::simulate::CountSeries;

/// Marginal family selector (shape only; parameters live in `ParamVector`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarginalFamilyKind {
    Poisson,
    Binomial,
    TruncGenPoisson,
    Tsmc,
}

/// Latent process selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatentKind {
    WhiteNoise,
    Ar1,
    Par1,
    Sar1,
}

/// One named parameter with its box and optional wrap period (phases).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Slot {
    pub name: String,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    /// Some(T): the value is a phase identified modulo T.
    pub wrap: Option<f64>,
}

/// Flattened parameter vector for one (family, latent) model shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamVector {
    pub family: MarginalFamilyKind,
    pub latent: LatentKind,
    pub period: u32,
    pub slots: Vec<Slot>,
}

fn curve_slots(prefix: char, kind: CurveKind, period: u32) -> Vec<Slot> {
    let t = period as f64;
    let (level_box, amp_box) = match kind {
        CurveKind::PositiveLevel => ((0.01, 100.0), (-100.0, 100.0)),
        CurveKind::Probability => ((0.01, 0.99), (-0.98, 0.98)),
        CurveKind::Variance => ((0.01, 200.0), (-200.0, 200.0)),
        CurveKind::Correlation => ((-0.99, 0.99), (-0.99, 0.99)),
    };
    vec![
        Slot {
            name: format!("{prefix}1"),
            value: 0.0,
            lower: level_box.0,
            upper: level_box.1,
            wrap: None,
        },
        Slot {
            name: format!("{prefix}2"),
            value: 0.0,
            lower: amp_box.0,
            upper: amp_box.1,
            wrap: None,
        },
        Slot {
            name: format!("{prefix}3"),
            value: 0.0,
            lower: 0.0,
            upper: t,
            wrap: Some(t),
        },
    ]
}

#[derive(Clone, Copy)]
enum CurveKind {
    PositiveLevel,
    Probability,
    Variance,
    Correlation,
}

impl ParamVector {
    /// Slot layout for a model shape, with default boxes and zeroed values.
    /// Marginal curves take the letters a, b; a PAR(1) coefficient curve takes
    /// the next free letter, matching the usual table layout.
    pub fn layout(family: MarginalFamilyKind, latent: LatentKind, period: u32) -> Result<Self> {
        if period == 0 {
            return Err(Error::domain("period must be >= 1"));
        }
        let mut slots = Vec::new();
        match family {
            MarginalFamilyKind::Poisson => {
                slots.extend(curve_slots('a', CurveKind::PositiveLevel, period));
            }
            MarginalFamilyKind::Binomial => {
                slots.extend(curve_slots('a', CurveKind::Probability, period));
            }
            MarginalFamilyKind::TruncGenPoisson => {
                slots.extend(curve_slots('a', CurveKind::PositiveLevel, period));
                slots.extend(curve_slots('b', CurveKind::Variance, period));
            }
            MarginalFamilyKind::Tsmc => {
                slots.extend(curve_slots('a', CurveKind::Probability, period));
                slots.extend(curve_slots('b', CurveKind::Probability, period));
            }
        }
        let next_prefix = match family {
            MarginalFamilyKind::Poisson | MarginalFamilyKind::Binomial => 'b',
            _ => 'c',
        };
        match latent {
            LatentKind::WhiteNoise => {}
            LatentKind::Ar1 => slots.push(Slot {
                name: "phi".into(),
                value: 0.0,
                lower: -0.99,
                upper: 0.99,
                wrap: None,
            }),
            LatentKind::Par1 => {
                slots.extend(curve_slots(next_prefix, CurveKind::Correlation, period))
            }
            LatentKind::Sar1 => {
                slots.push(Slot {
                    name: "phi".into(),
                    value: 0.0,
                    lower: -0.99,
                    upper: 0.99,
                    wrap: None,
                });
                slots.push(Slot {
                    name: "alpha".into(),
                    value: 0.0,
                    lower: -0.99,
                    upper: 0.99,
                    wrap: None,
                });
            }
        }
        Ok(Self {
            family,
            latent,
            period,
            slots,
        })
    }

    pub fn values(&self) -> Vec<f64> {
        self.slots.iter().map(|s| s.value).collect()
    }

    pub fn names(&self) -> Vec<&str> {
        self.slots.iter().map(|s| s.name.as_str()).collect()
    }

    pub fn with_values(mut self, values: &[f64]) -> Result<Self> {
        if values.len() != self.slots.len() {
            return Err(Error::domain(format!(
                "expected {} parameter values, got {}",
                self.slots.len(),
                values.len()
            )));
        }
        for (slot, &v) in self.slots.iter_mut().zip(values) {
            slot.value = v;
        }
        Ok(self)
    }

    /// Normalize every curve triple to a nonnegative amplitude, using the
    /// exact alias (level, amp, phase) ≡ (level, −amp, phase + T/2 mod T).
    /// The decoded model is unchanged; reported estimates become comparable
    /// across runs.
    pub fn canonicalize(&mut self) {
        let t = self.period as f64;
        let mut i = 0;
        while i + 2 < self.slots.len() {
            if self.slots[i + 2].wrap.is_some() {
                if self.slots[i + 1].value < 0.0 {
                    self.slots[i + 1].value = -self.slots[i + 1].value;
                    self.slots[i + 2].value = (self.slots[i + 2].value + t / 2.0).rem_euclid(t);
                }
                self.slots[i + 2].value = self.slots[i + 2].value.rem_euclid(t);
                i += 3;
            } else {
                i += 1;
            }
        }
    }

    /// Decode into validated model specs. Phases wrap modulo T here, so any
    /// parametrization differing by whole periods decodes identically.
    pub fn decode(&self) -> Result<(MarginalSpec, LatentSpec)> {
        let t = self.period;
        let v = self.values();
        let curve = |k: usize| FourierCurve::new(v[k], v[k + 1], v[k + 2], t);
        let marginal = match self.family {
            MarginalFamilyKind::Poisson => MarginalSpec::Poisson { lambda: curve(0)? },
            MarginalFamilyKind::Binomial => MarginalSpec::Binomial { p: curve(0)? },
            MarginalFamilyKind::TruncGenPoisson => MarginalSpec::TruncGenPoisson {
                mu: curve(0)?,
                sigma2: curve(3)?,
            },
            MarginalFamilyKind::Tsmc => MarginalSpec::Tsmc {
                alpha: curve(0)?,
                beta: curve(3)?,
            },
        };
        let idx = match self.family {
            MarginalFamilyKind::Poisson | MarginalFamilyKind::Binomial => 3,
            _ => 6,
        };
        marginal.validate()?;
        let latent = match self.latent {
            LatentKind::WhiteNoise => LatentSpec::WhiteNoise { period: t },
            LatentKind::Ar1 => LatentSpec::Ar1 {
                phi: v[idx],
                period: t,
            },
            LatentKind::Par1 => LatentSpec::Par1 {
                phi: FourierCurve::new(v[idx], v[idx + 1], v[idx + 2], t)?,
            },
            LatentKind::Sar1 => LatentSpec::Sar1 {
                phi: v[idx],
                alpha: v[idx + 1],
                period: t,
            },
        };
        latent.validate()?;
        Ok((marginal, latent))
    }
}

/// Optimizer and evaluation settings for `fit`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitOptions {
    /// Particles per likelihood evaluation during optimization.
    pub particles: usize,
    pub crn_seed: u64,
    pub max_iters: usize,
    /// Relative objective-change tolerance.
    pub tol: f64,
    /// Additional optimizer runs from randomly perturbed starts.
    pub restarts: usize,
    /// Seed for drawing the restart perturbations.
    pub restart_seed: u64,
    /// Particle count for the final reported re-evaluation.
    pub final_particles: usize,
    pub grad_step: f64,
    pub hess_step: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            particles: 500,
            crn_seed: 0,
            max_iters: 200,
            tol: 1e-6,
            restarts: 3,
            restart_seed: 0x5eed,
            final_particles: 5000,
            grad_step: 1e-5,
            hess_step: 1e-4,
        }
    }
}

/// Outcome of one optimizer run (reported for every restart).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RestartReport {
    pub start: Vec<f64>,
    pub loglik: f64,
    pub converged: bool,
    pub n_evals: usize,
}

/// One accepted optimizer iterate (for the trace output).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceEntry {
    pub eval: usize,
    pub loglik: f64,
    pub params: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitResult {
    pub estimates: ParamVector,
    /// GHK log-likelihood at the estimates (optimization particle count).
    pub loglik: f64,
    /// Re-evaluation at `final_particles` with the same CRN seed.
    pub loglik_refined: f64,
    pub final_particles: usize,
    pub se: Vec<f64>,
    /// True when the standard errors came from a pseudo-inverse because the
    /// numerical Hessian was not positive definite.
    pub se_fallback: bool,
    pub aic: f64,
    pub bic: f64,
    pub n_evals: usize,
    pub converged: bool,
    pub particles: usize,
    pub crn_seed: u64,
    pub n_obs: usize,
    pub restarts: Vec<RestartReport>,
    pub trace: Vec<TraceEntry>,
}

/// AIC and BIC from a log-likelihood: (−2ℓ + 2p, −2ℓ + p·log n).
pub fn information_criteria(loglik: f64, p: usize, n: usize) -> (f64, f64) {
    let p = p as f64;
    (
        -2.0 * loglik + 2.0 * p,
        -2.0 * loglik + p * (n as f64).ln(),
    )
}

/// Method-of-moments starting point: per-season means (and variances where
/// the family needs them) fit to first-order cosines; latent parameters 0.
pub fn default_init(
    family: MarginalFamilyKind,
    latent: LatentKind,
    data: &CountSeries,
) -> Result<ParamVector> {
    let period = data.period;
    let mut layout = ParamVector::layout(family, latent, period)?;
    let (means, vars) = per_season_moments(data);

    let assign = |slots: &mut [Slot], base: usize, fit: (f64, f64, f64)| {
        slots[base].value = fit.0.clamp(slots[base].lower, slots[base].upper);
        slots[base + 1].value = fit.1.clamp(slots[base + 1].lower, slots[base + 1].upper);
        slots[base + 2].value = fit.2.rem_euclid(period as f64);
    };

    match family {
        MarginalFamilyKind::Poisson => {
            assign(&mut layout.slots, 0, fit_cosine(&means));
        }
        MarginalFamilyKind::Binomial => {
            let p: Vec<f64> = means
                .iter()
                .map(|m| (m / crate::marginals::WEEK_DAYS as f64).clamp(0.02, 0.98))
                .collect();
            assign(&mut layout.slots, 0, fit_cosine(&p));
        }
        MarginalFamilyKind::TruncGenPoisson => {
            assign(&mut layout.slots, 0, fit_cosine(&means));
            // untruncated variance must dominate the mean at every season
            assign(&mut layout.slots, 3, fit_cosine(&vars));
            ensure_dominating_variance(&mut layout.slots);
        }
        MarginalFamilyKind::Tsmc => {
            // start from independent days: alpha = 1 − wet fraction, beta = wet
            let wet: Vec<f64> = means
                .iter()
                .map(|m| (m / crate::marginals::WEEK_DAYS as f64).clamp(0.02, 0.98))
                .collect();
            let dry: Vec<f64> = wet.iter().map(|w| 1.0 - w).collect();
            assign(&mut layout.slots, 0, fit_cosine(&dry));
            assign(&mut layout.slots, 3, fit_cosine(&wet));
        }
    }

    // shrink amplitudes until the decode validates (a clipped cosine fit can
    // cross an invariant boundary, e.g. |a2| >= a1)
    for _ in 0..12 {
        if layout.decode().is_ok() {
            return Ok(layout);
        }
        for slot in &mut layout.slots {
            if slot.name.ends_with('2') {
                slot.value *= 0.5;
            }
        }
    }
    layout.decode()?;
    Ok(layout)
}

fn per_season_moments(data: &CountSeries) -> (Vec<f64>, Vec<f64>) {
    let t = data.period as usize;
    let mut sums = vec![0.0; t];
    let mut sq = vec![0.0; t];
    let mut counts = vec![0usize; t];
    for (t0, &x) in data.x.iter().enumerate() {
        let s = (data.season(t0 + 1) - 1) as usize;
        sums[s] += x as f64;
        sq[s] += (x as f64) * (x as f64);
        counts[s] += 1;
    }
    let means: Vec<f64> = sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
        .collect();
    let vars: Vec<f64> = sq
        .iter()
        .zip(&counts)
        .zip(&means)
        .map(|((q, &c), m)| {
            if c > 1 {
                (q / c as f64 - m * m).max(1e-6) * c as f64 / (c as f64 - 1.0)
            } else {
                1.0
            }
        })
        .collect();
    (means, vars)
}

/// Least-squares fit of level + amplitude·cos(2π(ν−phase)/T) to per-season
/// values (first Fourier harmonic).
fn fit_cosine(values: &[f64]) -> (f64, f64, f64) {
    let t = values.len() as f64;
    let level = values.iter().sum::<f64>() / t;
    let mut ac = 0.0;
    let mut as_ = 0.0;
    for (i, v) in values.iter().enumerate() {
        let angle = 2.0 * std::f64::consts::PI * (i as f64 + 1.0) / t;
        ac += (v - level) * angle.cos();
        as_ += (v - level) * angle.sin();
    }
    ac *= 2.0 / t;
    as_ *= 2.0 / t;
    let amplitude = (ac * ac + as_ * as_).sqrt();
    let phase = if amplitude > 1e-12 {
        (t / (2.0 * std::f64::consts::PI)) * as_.atan2(ac)
    } else {
        0.0
    };
    (level, amplitude, phase.rem_euclid(t))
}

fn ensure_dominating_variance(slots: &mut [Slot]) {
    // smallest margin of sigma2(nu) − mu(nu) over a dense season sweep
    let period = slots[2].wrap.unwrap_or(1.0) as u32;
    let mu = FourierCurve::new(slots[0].value, slots[1].value, slots[2].value, period);
    let s2 = FourierCurve::new(slots[3].value, slots[4].value, slots[5].value, period);
    if let (Ok(mu), Ok(s2)) = (mu, s2) {
        let mut deficit = 0.0_f64;
        for nu in 1..=period {
            deficit = deficit.max(mu.value(nu) * 1.02 - s2.value(nu));
        }
        if deficit > 0.0 {
            slots[3].value = (slots[3].value + deficit).clamp(slots[3].lower, slots[3].upper);
        }
    }
}

/// Maximize the CRN-smoothed GHK log-likelihood over the parameter box.
pub fn fit(
    data: &CountSeries,
    family: MarginalFamilyKind,
    latent: LatentKind,
    init: Option<ParamVector>,
    opts: &FitOptions,
) -> Result<FitResult> {
    let layout = match init {
        Some(pv) => {
            if pv.period != data.period {
                return Err(Error::invalid(format!(
                    "init period {} disagrees with data period {}",
                    pv.period, data.period
                )));
            }
            pv
        }
        None => default_init(family, latent, data)?,
    };

    // the optimization objective: −loglik, +inf outside the valid region
    let lo: Vec<f64> = layout.slots.iter().map(|s| s.lower).collect();
    let hi: Vec<f64> = layout.slots.iter().map(|s| s.upper).collect();
    let mut n_evals_total = 0usize;
    let mut objective = |x: &[f64]| -> f64 {
        let pv = match layout.clone().with_values(x) {
            Ok(pv) => pv,
            Err(_) => return f64::INFINITY,
        };
        let (marginal, latent_spec) = match pv.decode() {
            Ok(specs) => specs,
            Err(_) => return f64::INFINITY,
        };
        match ghk_loglik(&marginal, &latent_spec, data, opts.particles, opts.crn_seed) {
            Ok(est) => -est.loglik,
            Err(_) => f64::INFINITY,
        }
    };

    // underflow right at the starting point deserves a real error, not a
    // silent non-convergence
    {
        let (marginal, latent_spec) = layout.decode()?;
        ghk_loglik(&marginal, &latent_spec, data, opts.particles, opts.crn_seed).map_err(
            |e| match e {
                Error::LikelihoodUnderflow { t } => Error::Domain(format!(
                    "likelihood underflows at the starting values (all particle weights \
                     vanished by t={t}); try different initial values or bounds"
                )),
                other => other,
            },
        )?;
    }

    let min_opts = MinimizeOptions {
        max_iters: opts.max_iters,
        tol: opts.tol,
        grad_step: opts.grad_step,
    };

    let mut starts: Vec<Vec<f64>> = vec![layout.values()];
    let mut rng = ChaCha8Rng::seed_from_u64(opts.restart_seed);
    for _ in 0..opts.restarts {
        let base = layout.values();
        let jittered: Vec<f64> = base
            .iter()
            .zip(lo.iter().zip(&hi))
            .map(|(&v, (&l, &h))| {
                let span = (h - l).min(2.0 * (v.abs() + 1.0));
                (v + rng.gen_range(-0.15..0.15) * span).clamp(l, h)
            })
            .collect();
        starts.push(jittered);
    }

    let mut best: Option<optim::MinimizeResult> = None;
    let mut restarts = Vec::with_capacity(starts.len());
    for start in &starts {
        let run = optim::minimize_boxed(&mut objective, start, &lo, &hi, &min_opts);
        n_evals_total += run.n_evals;
        restarts.push(RestartReport {
            start: start.clone(),
            loglik: -run.f,
            converged: run.converged,
            n_evals: run.n_evals,
        });
        let better = match &best {
            None => true,
            Some(b) => run.f < b.f,
        };
        if better {
            best = Some(run);
        }
    }
    let best = best.expect("at least one optimizer run");
    if !best.f.is_finite() {
        return Err(Error::Domain(
            "optimizer could not find a finite likelihood; try a different init".into(),
        ));
    }

    let mut estimates = layout.clone().with_values(&best.x)?;
    estimates.canonicalize();
    let loglik = -best.f;
    let p = estimates.slots.len();
    let (aic, bic) = information_criteria(loglik, p, data.len());
    let (se, se_fallback) = standard_errors(&estimates, data, opts)?;

    let (marginal, latent_spec) = estimates.decode()?;
    let refined = ghk_loglik(
        &marginal,
        &latent_spec,
        data,
        opts.final_particles,
        opts.crn_seed,
    )?;

    Ok(FitResult {
        estimates,
        loglik,
        loglik_refined: refined.loglik,
        final_particles: opts.final_particles,
        se,
        se_fallback,
        aic,
        bic,
        n_evals: n_evals_total,
        converged: best.converged,
        particles: opts.particles,
        crn_seed: opts.crn_seed,
        n_obs: data.len(),
        restarts,
        trace: best
            .trace
            .iter()
            .map(|tp| TraceEntry {
                eval: tp.eval,
                loglik: -tp.f,
                params: tp.x.clone(),
            })
            .collect(),
    })
}

/// Standard errors from the numerical Hessian of −loglik at the estimates,
/// evaluated with the same CRN seed. Returns (per-slot SEs, fallback flag);
/// the flag is set when the Hessian was not positive definite and a
/// pseudo-inverse was used.
pub fn standard_errors(
    estimates: &ParamVector,
    data: &CountSeries,
    opts: &FitOptions,
) -> Result<(Vec<f64>, bool)> {
    let x = estimates.values();
    let p = x.len();
    let layout = estimates.clone();
    let objective = |v: &[f64]| -> f64 {
        let pv = match layout.clone().with_values(v) {
            Ok(pv) => pv,
            Err(_) => return f64::INFINITY,
        };
        match pv.decode() {
            Ok((m, l)) => match ghk_loglik(&m, &l, data, opts.particles, opts.crn_seed) {
                Ok(est) => -est.loglik,
                Err(_) => f64::INFINITY,
            },
            Err(_) => f64::INFINITY,
        }
    };

    let f0 = objective(&x);
    if !f0.is_finite() {
        return Err(Error::Domain(
            "cannot evaluate the likelihood at the estimates".into(),
        ));
    }

    let steps: Vec<f64> = x
        .iter()
        .map(|v| opts.hess_step * v.abs().max(1.0))
        .collect();
    let mut hess = vec![vec![0.0_f64; p]; p];
    let mut xp = x.clone();
    for i in 0..p {
        xp[i] = x[i] + steps[i];
        let fp = objective(&xp);
        xp[i] = x[i] - steps[i];
        let fm = objective(&xp);
        xp[i] = x[i];
        hess[i][i] = (fp - 2.0 * f0 + fm) / (steps[i] * steps[i]);
    }
    for i in 0..p {
        for j in (i + 1)..p {
            xp[i] = x[i] + steps[i];
            xp[j] = x[j] + steps[j];
            let fpp = objective(&xp);
            xp[j] = x[j] - steps[j];
            let fpm = objective(&xp);
            xp[i] = x[i] - steps[i];
            let fmm = objective(&xp);
            xp[j] = x[j] + steps[j];
            let fmp = objective(&xp);
            xp[i] = x[i];
            xp[j] = x[j];
            let v = (fpp - fpm - fmp + fmm) / (4.0 * steps[i] * steps[j]);
            hess[i][j] = v;
            hess[j][i] = v;
        }
    }

    match optim::spd_inverse(&hess) {
        Some(cov) => {
            let se = (0..p).map(|i| cov[i][i].max(0.0).sqrt()).collect();
            Ok((se, false))
        }
        None => {
            let cov = optim::sym_pseudo_inverse(&hess);
            let se = (0..p).map(|i| cov[i][i].max(0.0).sqrt()).collect();
            Ok((se, true))
        }
    }
}
