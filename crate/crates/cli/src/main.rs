//! Command-line front end for seasonal count time series models: simulate,
//! fit, diagnose (PIT), link tables, and replicated simulation studies.
//!
//! Exit codes: 0 ok, 2 configuration error, 3 data error, 4 numeric failure.

mod commands;
mod config;
mod io;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;

#[derive(Debug)]
pub enum AppError {
    Config(String),
    Data(String),
    Numeric(String),
}

impl std::fmt::Display for AppError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AppError::Config(m) => write!(f, "config error: {m}"),
            AppError::Data(m) => write!(f, "data error: {m}"),
            AppError::Numeric(m) => write!(f, "numeric failure: {m}"),
        }
    }
}

impl AppError {
    fn exit_code(&self) -> i32 {
        match self {
            AppError::Config(_) => 2,
            AppError::Data(_) => 3,
            AppError::Numeric(_) => 4,
        }
    }

    /// Map core errors arising after configuration was accepted.
    fn numeric(e: percount::Error) -> Self {
        match e {
            percount::Error::Data { t, message } => {
                AppError::Data(format!("at t={t}: {message}"))
            }
            other => AppError::Numeric(other.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "percount",
    version,
    about = "Seasonal count time series: latent-Gaussian models, GHK likelihood, diagnostics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Run configuration (TOML).
    #[arg(long)]
    config: String,
    /// Override run.data from the config.
    #[arg(long)]
    data: Option<String>,
    /// Override run.out_dir from the config.
    #[arg(long)]
    out: Option<String>,
    /// Override run.particles from the config.
    #[arg(long)]
    particles: Option<usize>,
    /// Override run.seed (simulation seed) from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Override run.crn_seed (likelihood CRN seed) from the config.
    #[arg(long)]
    crn_seed: Option<u64>,
    /// Worker threads for particle and replicate parallelism (0 = automatic).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic count series from the configured model.
    Simulate(CommonArgs),
    /// Fit the configured model shape to a data CSV by maximum simulated
    /// likelihood.
    Fit(CommonArgs),
    /// PIT histogram and probit residuals of a fully parametrized model
    /// against a data CSV.
    Pit {
        #[command(flatten)]
        common: CommonArgs,
        /// Number of PIT histogram bins.
        #[arg(long, default_value_t = 10)]
        bins: usize,
        /// Also emit SVG renderings.
        #[arg(long)]
        svg: bool,
    },
    /// Emit the (u, L(u), L'(u)) link table for the configured season pair.
    Link(CommonArgs),
    /// Replicated simulate-and-fit study over the configured (n, period)
    /// grid.
    Study(CommonArgs),
    /// Configuration utilities.
    Config {
        /// Print the documented default configuration and exit.
        #[arg(long)]
        print_defaults: bool,
    },
}

fn apply_overrides(config: &mut RunConfig, args: &CommonArgs) {
    if let Some(data) = &args.data {
        config.run.data = Some(data.clone());
    }
    if let Some(out) = &args.out {
        config.run.out_dir = out.clone();
    }
    if let Some(p) = args.particles {
        config.run.particles = p;
    }
    if let Some(s) = args.seed {
        config.run.seed = s;
    }
    if let Some(s) = args.crn_seed {
        config.run.crn_seed = s;
    }
    if let Some(w) = args.workers {
        config.run.workers = w;
    }
}

fn load(args: &CommonArgs) -> Result<RunConfig, AppError> {
    let mut config = RunConfig::load(&args.config)?;
    apply_overrides(&mut config, args);
    if config.run.workers > 0 {
        // ignore failure if a pool was already installed (tests)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(config.run.workers)
            .build_global();
    }
    Ok(config)
}

fn run() -> Result<(), AppError> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Simulate(args) => commands::run_simulate(&load(args)?),
        Command::Fit(args) => commands::run_fit(&load(args)?),
        Command::Pit { common, bins, svg } => commands::run_pit(&load(common)?, *bins, *svg),
        Command::Link(args) => commands::run_link(&load(args)?),
        Command::Study(args) => commands::run_study(&load(args)?),
        Command::Config { print_defaults } => {
            if *print_defaults {
                commands::run_config_defaults()
            } else {
                Err(AppError::Config(
                    "nothing to do: pass --print-defaults".into(),
                ))
            }
        }
    }
}

fn main() {
    if let Err(e) = run() {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
