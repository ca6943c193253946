//! Drude metal response through an auxiliary differential equation for the
//! free-carrier current, `dJ/dt = ε0 ω_d² E − Γ_d J`.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use num_complex::Complex64;

use crate::constants::VACUUM_PERMITTIVITY;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DrudeMedium {
    /// ω_d, rad/s.
    pub plasma_frequency: f64,
    /// Γ_d, rad/s.
    pub damping_rate: f64,
    /// Background permittivity ε∞ (1 for a pure Drude metal).
    pub eps_inf: f64,
    pub cells: Range<usize>,
}

impl DrudeMedium {
    pub fn new(plasma_frequency: f64, damping_rate: f64, cells: Range<usize>) -> Result<Self> {
        if !(plasma_frequency > 0.0 && plasma_frequency.is_finite()) {
            return Err(Error::invalid("drude_plasma_frequency", "must be positive"));
        }
        if !(damping_rate >= 0.0 && damping_rate.is_finite()) {
            return Err(Error::invalid("drude_damping_rate", "must be non-negative"));
        }
        Ok(DrudeMedium { plasma_frequency, damping_rate, eps_inf: 1.0, cells })
    }

    pub fn with_eps_inf(mut self, eps_inf: f64) -> Self {
        self.eps_inf = eps_inf;
        self
    }

    /// `(a, b)` of the update `J ← a J + b E`.
    pub fn coefficients(&self, dt: f64) -> (f64, f64) {
        let half = 0.5 * self.damping_rate * dt;
        let a = (1.0 - half) / (1.0 + half);
        let b = VACUUM_PERMITTIVITY * self.plasma_frequency * self.plasma_frequency * dt / (1.0 + half);
        (a, b)
    }
}

/// Free-carrier current over a medium's cells, sampled at half-integer steps.
#[derive(Debug, Clone, PartialEq)]
pub struct DrudeState {
    pub current: Vec<f64>,
}

impl DrudeState {
    pub fn new(medium: &DrudeMedium) -> Self {
        DrudeState { current: vec![0.0; medium.cells.len()] }
    }
}

/// Advance `J` from n−1/2 to n+1/2 using `ex` at step n (the midpoint).
pub fn update_drude_current(state: &mut DrudeState, medium: &DrudeMedium, ex: &[f64], dt: f64) {
    let (a, b) = medium.coefficients(dt);
    for (j, &e) in state.current.iter_mut().zip(&ex[medium.cells.clone()]) {
        *j = a * *j + b * e;
    }
}

/// Relative permittivity `ε∞ − ω_d²/(ω² + iΓ_d ω)`.
pub fn drude_permittivity(medium: &DrudeMedium, omega: f64) -> Result<Complex64> {
    if omega == 0.0 {
        return Err(Error::ZeroFrequency);
    }
    let wp2 = medium.plasma_frequency * medium.plasma_frequency;
    let denom = Complex64::new(omega * omega, medium.damping_rate * omega);
    Ok(Complex64::new(medium.eps_inf, 0.0) - Complex64::new(wp2, 0.0) / denom)
}
