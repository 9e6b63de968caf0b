//! Subcommand implementations. Every artifact write goes through
//! `io::write_artifact` so outputs stay deterministic and carry sidecars.

use std::fmt::Write as _;

use percount::diagnostics;
use percount::estimate::{fit, FitOptions, FitResult};
use percount::hermite::{link_derivative, link_table};
use percount::simulate::simulate_counts;
use percount::CountSeries;

use crate::config::RunConfig;
use crate::io::{fmt, read_counts, svg_bars, svg_line, write_artifact};
use crate::AppError;

/// `simulate`: write (t, season, x) rows for one synthetic series.
pub fn run_simulate(config: &RunConfig) -> Result<(), AppError> {
    if config.run.n == 0 {
        return Err(AppError::Config("run.n must be >= 1".into()));
    }
    let marginal = config.marginal_spec()?;
    let latent = config.latent_spec()?;
    let series = simulate_counts(&marginal, &latent, config.run.n, config.run.seed)
        .map_err(AppError::numeric)?;

    let mut csv = String::from("t,season,x\n");
    for (t0, &x) in series.x.iter().enumerate() {
        let _ = writeln!(csv, "{},{},{}", t0 + 1, series.season(t0 + 1), x);
    }
    let path = write_artifact(&config.run.out_dir, "counts.csv", &csv, "simulate", config)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

/// `fit`: maximum simulated likelihood on a data CSV; writes a JSON report
/// and the optimizer trace. Exit code 0 iff converged.
pub fn run_fit(config: &RunConfig) -> Result<(), AppError> {
    let data = load_data(config)?;
    let result = fit_from_config(config, &data)?;

    let report = serde_json::to_string_pretty(&result)
        .map_err(|e| AppError::Numeric(format!("cannot serialize fit report: {e}")))?;
    write_artifact(
        &config.run.out_dir,
        "fit.json",
        &format!("{report}\n"),
        "fit",
        config,
    )?;

    let mut trace = String::from("eval,loglik");
    for name in result.estimates.names() {
        let _ = write!(trace, ",{name}");
    }
    trace.push('\n');
    for entry in &result.trace {
        let _ = write!(trace, "{},{}", entry.eval, fmt(entry.loglik));
        for v in &entry.params {
            let _ = write!(trace, ",{}", fmt(*v));
        }
        trace.push('\n');
    }
    write_artifact(&config.run.out_dir, "trace.csv", &trace, "fit", config)?;

    for (name, value, se) in result
        .estimates
        .names()
        .iter()
        .zip(result.estimates.values())
        .map(|(n, v)| (*n, v, 0.0))
        .zip(&result.se)
        .map(|((n, v, _), s)| (n, v, *s))
    {
        eprintln!("  {name:>6} = {value:.5}  (se {se:.5})");
    }
    eprintln!(
        "  loglik {} (m={}), refined {} (m={}), aic {}, bic {}, converged: {}",
        fmt(result.loglik),
        result.particles,
        fmt(result.loglik_refined),
        result.final_particles,
        fmt(result.aic),
        fmt(result.bic),
        result.converged
    );
    if result.converged {
        Ok(())
    } else {
        Err(AppError::Numeric(
            "optimizer did not converge (best-so-far written to fit.json)".into(),
        ))
    }
}

/// `pit`: nonrandomized PIT histogram and probit residuals for a fully
/// parametrized model against a data CSV.
pub fn run_pit(config: &RunConfig, bins: usize, svg: bool) -> Result<(), AppError> {
    let data = load_data(config)?;
    let marginal = config.marginal_spec()?;
    let latent = config.latent_spec()?;
    let summary = diagnostics::pit_summary(
        &marginal,
        &latent,
        &data,
        config.run.particles,
        config.run.crn_seed,
        bins,
    )
    .map_err(AppError::numeric)?;
    let residuals = diagnostics::residuals(
        &marginal,
        &latent,
        &data,
        config.run.particles,
        config.run.crn_seed,
    )
    .map_err(AppError::numeric)?;

    let mut csv = String::from("bin,lower,upper,mass\n");
    for (j, &mass) in summary.masses.iter().enumerate() {
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            j + 1,
            fmt(j as f64 / bins as f64),
            fmt((j + 1) as f64 / bins as f64),
            fmt(mass)
        );
    }
    write_artifact(&config.run.out_dir, "pit_bins.csv", &csv, "pit", config)?;

    let mut rcsv = String::from("t,residual\n");
    for (t0, r) in residuals.iter().enumerate() {
        let _ = writeln!(rcsv, "{},{}", t0 + 1, fmt(*r));
    }
    write_artifact(&config.run.out_dir, "residuals.csv", &rcsv, "pit", config)?;

    if svg {
        write_artifact(
            &config.run.out_dir,
            "pit_bins.svg",
            &svg_bars(&summary.masses, 1.0 / bins as f64),
            "pit",
            config,
        )?;
        write_artifact(
            &config.run.out_dir,
            "residuals.svg",
            &svg_line(&residuals),
            "pit",
            config,
        )?;
    }
    Ok(())
}

/// `link`: (u, L(u), L'(u)) table for the configured season pair.
pub fn run_link(config: &RunConfig) -> Result<(), AppError> {
    let marginal = config.marginal_spec()?;
    let block = &config.link;
    if block.nu1 < 1 || block.nu1 > config.period || block.nu2 < 1 || block.nu2 > config.period {
        return Err(AppError::Config(format!(
            "link seasons ({}, {}) must lie in 1..={}",
            block.nu1, block.nu2, config.period
        )));
    }
    if !(block.step > 0.0 && block.step < 1.0) {
        return Err(AppError::Config("link.step must lie in (0,1)".into()));
    }
    let table = link_table(&marginal, block.nu1, block.nu2, block.order)
        .map_err(AppError::numeric)?;
    let mut csv = String::from("u,link,link_derivative\n");
    let mut u = -1.0 + block.step;
    while u < 1.0 - block.step / 2.0 {
        let d = link_derivative(&marginal, block.nu1, block.nu2, u, block.order)
            .map_err(AppError::numeric)?;
        let _ = writeln!(csv, "{},{},{}", fmt(u), fmt(table.eval(u)), fmt(d));
        u += block.step;
    }
    write_artifact(&config.run.out_dir, "link.csv", &csv, "link", config)?;
    Ok(())
}

/// `study`: replicated simulate-and-fit over the (n, period) grid; writes
/// per-parameter mean, across-replicate SD, and mean Hessian SE.
pub fn run_study(config: &RunConfig) -> Result<(), AppError> {
    let study = config
        .study
        .clone()
        .ok_or_else(|| AppError::Config("study block missing from config".into()))?;
    if study.replicates == 0 {
        return Err(AppError::Config("study.replicates must be >= 1".into()));
    }
    let family = config.family_kind()?;
    let latent_kind = config.latent_kind()?;

    let mut csv = String::from("n,period,param,truth,mean,sd,mean_se,failures\n");
    for (g, entry) in study.grid.iter().enumerate() {
        let marginal = config.marginal_spec_at(entry.period)?;
        let latent = config.latent_spec_at(entry.period)?;
        let truth = truth_values(config, entry.period)?;

        let mut estimates: Vec<Vec<f64>> = Vec::new();
        let mut ses: Vec<Vec<f64>> = Vec::new();
        let mut names: Vec<String> = Vec::new();
        let mut failures = 0usize;
        for r in 0..study.replicates {
            let offset = (g as u64) * 1_000_000 + r as u64;
            let seed = study.base_seed + offset;
            let crn = config.run.crn_seed.wrapping_add(1_000_000_007).wrapping_add(offset);
            let replicate = (|| -> Result<FitResult, AppError> {
                let data = simulate_counts(&marginal, &latent, entry.n, seed)
                    .map_err(AppError::numeric)?;
                let opts = FitOptions {
                    particles: config.run.particles,
                    crn_seed: crn,
                    max_iters: config.optimizer.max_iters,
                    tol: config.optimizer.tol,
                    restarts: config.optimizer.restarts,
                    final_particles: config.optimizer.final_particles,
                    ..FitOptions::default()
                };
                fit(&data, family, latent_kind, None, &opts).map_err(AppError::numeric)
            })();
            match replicate {
                Ok(result) => {
                    if names.is_empty() {
                        names = result
                            .estimates
                            .names()
                            .iter()
                            .map(|s| s.to_string())
                            .collect();
                        estimates = vec![Vec::new(); names.len()];
                        ses = vec![Vec::new(); names.len()];
                    }
                    for (i, v) in result.estimates.values().iter().enumerate() {
                        estimates[i].push(*v);
                    }
                    for (i, s) in result.se.iter().enumerate() {
                        ses[i].push(*s);
                    }
                }
                Err(e) => {
                    failures += 1;
                    eprintln!(
                        "study: replicate {r} of grid (n={}, T={}) failed: {e}",
                        entry.n, entry.period
                    );
                }
            }
        }

        for (i, name) in names.iter().enumerate() {
            let vals = &estimates[i];
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            let sd = if vals.len() > 1 {
                let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
                    / (vals.len() as f64 - 1.0);
                fmt(var.sqrt())
            } else {
                String::new() // undefined sample SD at R=1
            };
            let mean_se = ses[i].iter().sum::<f64>() / ses[i].len() as f64;
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{},{},{}",
                entry.n,
                entry.period,
                name,
                fmt(truth[i]),
                fmt(mean),
                sd,
                fmt(mean_se),
                failures
            );
        }
    }
    write_artifact(&config.run.out_dir, "study.csv", &csv, "study", config)?;
    Ok(())
}

/// `config --print-defaults`: dump a fully documented default configuration.
pub fn run_config_defaults() -> Result<(), AppError> {
    let text = toml::to_string_pretty(&RunConfig::defaults())
        .map_err(|e| AppError::Config(format!("cannot serialize defaults: {e}")))?;
    println!("{text}");
    Ok(())
}

fn load_data(config: &RunConfig) -> Result<CountSeries, AppError> {
    let path = config
        .run
        .data
        .as_ref()
        .ok_or_else(|| AppError::Config("no data file: set run.data or pass --data".into()))?;
    read_counts(path, config.period)
}

pub fn fit_from_config(config: &RunConfig, data: &CountSeries) -> Result<FitResult, AppError> {
    let family = config.family_kind()?;
    let latent_kind = config.latent_kind()?;
    // config parameters, when fully present, serve as the starting point
    let init = if config.has_marginal_params() && config.has_latent_params() {
        let marginal = config.marginal_spec()?;
        let latent = config.latent_spec()?;
        Some(
            init_from_specs(config, &marginal, &latent)
                .map_err(|e| AppError::Config(format!("init from config: {e}")))?,
        )
    } else {
        None
    };
    let opts = FitOptions {
        particles: config.run.particles,
        crn_seed: config.run.crn_seed,
        max_iters: config.optimizer.max_iters,
        tol: config.optimizer.tol,
        restarts: config.optimizer.restarts,
        final_particles: config.optimizer.final_particles,
        ..FitOptions::default()
    };
    fit(data, family, latent_kind, init, &opts).map_err(AppError::numeric)
}

fn init_from_specs(
    config: &RunConfig,
    marginal: &percount::MarginalSpec,
    latent: &percount::LatentSpec,
) -> percount::Result<percount::ParamVector> {
    use percount::{LatentSpec, MarginalSpec, ParamVector};
    let layout = ParamVector::layout(
        config.family_kind().map_err(to_core)?,
        config.latent_kind().map_err(to_core)?,
        config.period,
    )?;
    let mut values = Vec::new();
    match marginal {
        MarginalSpec::Poisson { lambda } => push_curve(&mut values, lambda),
        MarginalSpec::Binomial { p } => push_curve(&mut values, p),
        MarginalSpec::TruncGenPoisson { mu, sigma2 } => {
            push_curve(&mut values, mu);
            push_curve(&mut values, sigma2);
        }
        MarginalSpec::Tsmc { alpha, beta } => {
            push_curve(&mut values, alpha);
            push_curve(&mut values, beta);
        }
    }
    match latent {
        LatentSpec::WhiteNoise { .. } => {}
        LatentSpec::Ar1 { phi, .. } => values.push(*phi),
        LatentSpec::Par1 { phi } => push_curve(&mut values, phi),
        LatentSpec::Sar1 { phi, alpha, .. } => {
            values.push(*phi);
            values.push(*alpha);
        }
    }
    layout.with_values(&values)
}

fn push_curve(values: &mut Vec<f64>, curve: &percount::FourierCurve) {
    values.push(curve.level());
    values.push(curve.amplitude());
    values.push(curve.phase());
}

fn to_core(e: AppError) -> percount::Error {
    percount::Error::InvalidParameter(e.to_string())
}

fn truth_values(config: &RunConfig, period: u32) -> Result<Vec<f64>, AppError> {
    let marginal = config.marginal_spec_at(period)?;
    let latent = config.latent_spec_at(period)?;
    let pv = init_from_specs(config, &marginal, &latent)
        .map_err(|e| AppError::Config(format!("{e}")))?;
    Ok(pv.values())
}
