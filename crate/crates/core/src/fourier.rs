//! First-order cosine parameter curves over the seasons of a cycle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Seasonal parameter curve `value(ν) = level + amplitude·cos(2π(ν−phase)/T)`
/// for ν ∈ {1..T}. The phase is stored modulo T so that parametrizations
/// differing by whole periods are identified.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierCurve {
    level: f64,
    amplitude: f64,
    phase: f64,
    period: u32,
}

impl FourierCurve {
    pub fn new(level: f64, amplitude: f64, phase: f64, period: u32) -> Result<Self> {
        if period == 0 {
            return Err(Error::invalid("Fourier curve period must be >= 1"));
        }
        if !(level.is_finite() && amplitude.is_finite() && phase.is_finite()) {
            return Err(Error::invalid("Fourier curve parameters must be finite"));
        }
        let t = period as f64;
        Ok(Self {
            level,
            amplitude,
            phase: phase.rem_euclid(t),
            period,
        })
    }

    /// Constant curve with zero amplitude.
    pub fn constant(level: f64, period: u32) -> Result<Self> {
        Self::new(level, 0.0, 0.0, period)
    }

    pub fn level(&self) -> f64 {
        self.level
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// Phase, wrapped to [0, T).
    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn period(&self) -> u32 {
        self.period
    }

    /// Curve value at season ν ∈ {1..T}.
    pub fn value(&self, nu: u32) -> f64 {
        debug_assert!(nu >= 1 && nu <= self.period, "season out of range");
        let t = self.period as f64;
        self.level
            + self.amplitude * (2.0 * std::f64::consts::PI * (nu as f64 - self.phase) / t).cos()
    }

    /// Values at all seasons 1..=T.
    pub fn values(&self) -> Vec<f64> {
        (1..=self.period).map(|nu| self.value(nu)).collect()
    }
}

/// Season of 1-based time t: ν = ((t−1) mod T) + 1.
#[inline]
pub fn season_of(t: usize, period: u32) -> u32 {
    debug_assert!(t >= 1, "time indices are 1-based");
    ((t - 1) as u32 % period) + 1
}
