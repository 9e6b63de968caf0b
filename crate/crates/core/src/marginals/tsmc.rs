//! Two-state Markov chain marginal: the number of wet days in an L-day week
//! when day-to-day wet/dry states follow a two-state chain started from its
//! stationary law.
//!
//! Transition matrix on states {0 = dry, 1 = wet}:
//!
//! ```text
//!     Q = [ α    1−α ]
//!         [ 1−β  β   ]
//! ```
//!
//! α = P(dry→dry), β = P(wet→wet).

use crate::error::{Error, Result};

/// Stationary distribution (π₀, π₁) of the chain, the left eigenvector of Q:
/// π₀ = (1−β)/(2−α−β), π₁ = (1−α)/(2−α−β).
pub fn stationary(alpha: f64, beta: f64) -> Result<(f64, f64)> {
    let denom = 2.0 - alpha - beta;
    if !(denom > 0.0) {
        return Err(Error::domain(
            "two-state chain with alpha+beta >= 2 has no unique stationary law",
        ));
    }
    Ok(((1.0 - beta) / denom, (1.0 - alpha) / denom))
}

/// Distribution of Σ_{t=1}^L M_t with M₀ drawn from the stationary law.
/// Returned vector has length L+1 (mass at k = 0..L).
pub fn pmf(alpha: f64, beta: f64, len: usize) -> Result<Vec<f64>> {
    if !(alpha > 0.0 && alpha < 1.0 && beta > 0.0 && beta < 1.0) {
        return Err(Error::invalid(format!(
            "two-state chain probabilities must lie in (0,1): alpha={alpha}, beta={beta}"
        )));
    }
    if len == 0 {
        return Err(Error::domain("week length must be >= 1"));
    }
    let (pi0, pi1) = stationary(alpha, beta)?;

    // p0[k] = P(sum over the remaining days = k | current state dry), built up
    // one day at a time: conditioning on the first day's transition reduces an
    // L-day week to an (L−1)-day week started from the new state.
    let mut p0 = vec![0.0; len + 1];
    let mut p1 = vec![0.0; len + 1];
    p0[0] = alpha;
    p0[1] = 1.0 - alpha;
    p1[0] = 1.0 - beta;
    p1[1] = beta;

    let mut next0 = vec![0.0; len + 1];
    let mut next1 = vec![0.0; len + 1];
    for day in 2..=len {
        for k in 0..=day {
            let wet_prev = if k >= 1 { p1[k - 1] } else { 0.0 };
            next0[k] = (1.0 - alpha) * wet_prev + alpha * p0[k];
            next1[k] = beta * wet_prev + (1.0 - beta) * p0[k];
        }
        std::mem::swap(&mut p0, &mut next0);
        std::mem::swap(&mut p1, &mut next1);
    }

    Ok((0..=len).map(|k| pi0 * p0[k] + pi1 * p1[k]).collect())
}
