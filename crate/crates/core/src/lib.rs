//! Seasonal (periodically stationary) count time series built by pushing a
//! standardized latent Gaussian process through seasonal count marginals.
//!
//! The crate provides the four marginal families (Poisson, binomial,
//! truncated generalized Poisson, two-state Markov chain weekly counts),
//! the four latent processes (white noise, AR(1), PAR(1), SAR(1) with AR(1)
//! noise), Hermite-expansion links between latent and count autocorrelation,
//! exact simulation, a GHK sequential-importance-sampling likelihood with
//! common random numbers, bounded quasi-Newton maximum likelihood with
//! Hessian standard errors, and PIT diagnostics.

pub mod diagnostics;
pub mod error;
pub mod estimate;
pub mod fourier;
pub mod ghk;
pub mod hermite;
pub mod latent;
pub mod marginals;
pub mod normal;
pub mod optim;
pub mod simulate;

pub use error::{Error, Result};
pub use estimate::{
    default_init, fit, information_criteria, standard_errors, FitOptions, FitResult, LatentKind,
    MarginalFamilyKind, ParamVector,
};
pub use fourier::{season_of, FourierCurve};
pub use ghk::{bounds_from_data, filter_pass, ghk_loglik, pit_weights, sample_truncated_normal};
pub use latent::LatentSpec;
pub use marginals::MarginalSpec;
pub use simulate::{simulate_counts, transform, CountSeries};
