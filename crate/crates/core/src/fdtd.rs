//! Staggered 1D Yee grid for `Ex` and `By`, graded-conductivity PML, and the
//! point source.
//!
//! Staggering convention: `ex[i]` sits at the center of cell `i` on integer
//! time steps; `by[j]` sits on the face between cells `j` and `j + 1` on
//! half-integer steps, so `by.len() == ex.len() - 1`. Beyond the outermost
//! cells `By` is held at zero (a magnetic wall), which the PML hides.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::constants::{SPEED_OF_LIGHT, VACUUM_PERMEABILITY, VACUUM_PERMITTIVITY};
use crate::error::{Error, Result};
use crate::math;
use crate::scenario::SourceKind;

/// PML conductivities indexed by depth into the layer.
///
/// `sigma_e[k]` belongs to the cell center at depth `k + 1/2` cells,
/// `sigma_h[k]` to the face at depth `k` cells (so `sigma_h[0] == 0`, the
/// interface face). Magnetic conductivity is matched: `σ_h = σ_e μ0/ε0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PmlProfile {
    pub sigma_e: Vec<f64>,
    pub sigma_h: Vec<f64>,
    pub sigma_max: f64,
}

impl PmlProfile {
    pub fn cells(&self) -> usize {
        self.sigma_e.len()
    }
}

/// Polynomial grading `σ(ρ) = σ_max (ρ/cells)^m` with
/// `σ_max = −(m+1) ln(R) ε0 c0 / (2 cells dx)`.
///
/// `cells == 0` disables the layer.
pub fn build_pml_profile(cells: usize, exponent: f64, target_reflection: f64, dx: f64) -> Result<PmlProfile> {
    if cells == 0 {
        return Ok(PmlProfile { sigma_e: Vec::new(), sigma_h: Vec::new(), sigma_max: 0.0 });
    }
    if cells < 8 {
        return Err(Error::invalid("pml_cells", "must be 0 or at least 8"));
    }
    if !(target_reflection > 0.0 && target_reflection < 1.0) {
        return Err(Error::invalid("pml_target_reflection", "must lie in (0, 1)"));
    }
    if !(exponent >= 0.0 && exponent.is_finite()) {
        return Err(Error::invalid("pml_exponent", "must be non-negative"));
    }
    if !(dx > 0.0) {
        return Err(Error::invalid("grid_resolution", "must be positive"));
    }
    let n = cells as f64;
    let sigma_max =
        -(exponent + 1.0) * math::ln(target_reflection) * VACUUM_PERMITTIVITY * SPEED_OF_LIGHT / (2.0 * n * dx);
    let grade = |depth: f64| sigma_max * math::powf(depth / n, exponent);
    let sigma_e = (0..cells).map(|k| grade(k as f64 + 0.5)).collect();
    let sigma_h = (0..cells)
        .map(|k| if k == 0 { 0.0 } else { grade(k as f64) * VACUUM_PERMEABILITY / VACUUM_PERMITTIVITY })
        .collect();
    Ok(PmlProfile { sigma_e, sigma_h, sigma_max })
}

/// Field arrays plus the per-cell update coefficients.
///
/// E update: `ex ← ca·ex − cb·((by[i] − by[i−1])/(μ0 dx) + J)`.
/// B update: `by ← da·by − db·(ex[j+1] − ex[j])/dx`.
/// Outside the PML `ca = da = 1`, `cb = dt/(ε0 ε_r)`, `db = dt`.
#[derive(Debug, Clone)]
pub struct FieldState {
    pub ex: Vec<f64>,
    pub by: Vec<f64>,
    /// Electric PML conductivity per cell, S/m (zero outside the PML).
    pub pml_sigma_e: Vec<f64>,
    /// Magnetic PML conductivity per face, Ω/m (zero outside the PML).
    pub pml_sigma_h: Vec<f64>,
    pub time_index: u64,
    pub dx: f64,
    pub dt: f64,
    ca: Vec<f64>,
    cb: Vec<f64>,
    da: Vec<f64>,
    db: Vec<f64>,
}

impl FieldState {
    /// Vacuum grid of `cells` cells with a PML of `profile.cells()` cells on
    /// each side.
    pub fn new(cells: usize, dx: f64, dt: f64, profile: &PmlProfile) -> Result<Self> {
        let p = profile.cells();
        if cells < 2 || cells < 2 * p + 1 {
            return Err(Error::GridTooSmall(alloc::format!(
                "{cells} cells cannot hold two {p}-cell PMLs"
            )));
        }
        if dt > dx / SPEED_OF_LIGHT * (1.0 + 1e-12) {
            return Err(Error::CflViolation { dt, limit: dx / SPEED_OF_LIGHT });
        }
        let mut sigma_e = vec![0.0; cells];
        let mut sigma_h = vec![0.0; cells - 1];
        for k in 0..p {
            // left layer counts depth leftward from the interface face p-1
            sigma_e[p - 1 - k] = profile.sigma_e[k];
            sigma_e[cells - p + k] = profile.sigma_e[k];
            sigma_h[p - 1 - k] = profile.sigma_h[k];
            sigma_h[cells - p - 1 + k] = profile.sigma_h[k];
        }
        let mut state = FieldState {
            ex: vec![0.0; cells],
            by: vec![0.0; cells - 1],
            pml_sigma_e: sigma_e,
            pml_sigma_h: sigma_h,
            time_index: 0,
            dx,
            dt,
            ca: Vec::new(),
            cb: Vec::new(),
            da: Vec::new(),
            db: Vec::new(),
        };
        state.rebuild_coefficients(&vec![1.0; cells]);
        Ok(state)
    }

    /// Set a background relative permittivity per cell (e.g. ε∞ of a metal).
    pub fn set_background_permittivity(&mut self, eps_r: &[f64]) -> Result<()> {
        if eps_r.len() != self.ex.len() {
            return Err(Error::LengthMismatch { expected: self.ex.len(), found: eps_r.len() });
        }
        self.rebuild_coefficients(eps_r);
        Ok(())
    }

    fn rebuild_coefficients(&mut self, eps_r: &[f64]) {
        let dt = self.dt;
        let (ca, cb) = self
            .pml_sigma_e
            .iter()
            .zip(eps_r)
            .map(|(&s, &er)| {
                let eps = VACUUM_PERMITTIVITY * er;
                if s == 0.0 {
                    (1.0, dt / eps)
                } else {
                    let a = math::exp(-s * dt / eps);
                    (a, (1.0 - a) / s)
                }
            })
            .unzip();
        let (da, db) = self
            .pml_sigma_h
            .iter()
            .map(|&s| {
                if s == 0.0 {
                    (1.0, dt)
                } else {
                    let rate = s / VACUUM_PERMEABILITY;
                    let a = math::exp(-rate * dt);
                    (a, (1.0 - a) / rate)
                }
            })
            .unzip();
        self.ca = ca;
        self.cb = cb;
        self.da = da;
        self.db = db;
    }

    pub fn cell_count(&self) -> usize {
        self.ex.len()
    }

    pub fn time(&self) -> f64 {
        self.time_index as f64 * self.dt
    }

    /// Advance `By` from n−1/2 to n+1/2.
    pub fn update_b(&mut self) {
        let inv_dx = 1.0 / self.dx;
        let ex = &self.ex;
        for (j, b) in self.by.iter_mut().enumerate() {
            *b = self.da[j] * *b - self.db[j] * (ex[j + 1] - ex[j]) * inv_dx;
        }
    }

    /// Advance `Ex` from n to n+1 with the current density `current` (A/m²)
    /// sampled at n+1/2.
    pub fn update_e(&mut self, current: &[f64]) -> Result<()> {
        let n = self.ex.len();
        if current.len() != n {
            return Err(Error::LengthMismatch { expected: n, found: current.len() });
        }
        let k = 1.0 / (VACUUM_PERMEABILITY * self.dx);
        let by = &self.by;
        for (i, e) in self.ex.iter_mut().enumerate() {
            let right = if i < n - 1 { by[i] } else { 0.0 };
            let left = if i > 0 { by[i - 1] } else { 0.0 };
            *e = self.ca[i] * *e - self.cb[i] * ((right - left) * k + current[i]);
        }
        Ok(())
    }

    /// Explicit estimate of `ex[i]` at n+1 given `By` at n+1/2 and a guess
    /// of the current at n+1/2.
    pub fn predict_e(&self, i: usize, current: f64) -> f64 {
        let n = self.ex.len();
        let right = if i < n - 1 { self.by[i] } else { 0.0 };
        let left = if i > 0 { self.by[i - 1] } else { 0.0 };
        let k = 1.0 / (VACUUM_PERMEABILITY * self.dx);
        self.ca[i] * self.ex[i] - self.cb[i] * ((right - left) * k + current)
    }

    /// Apply the source at time `t`.
    ///
    /// A soft source adds `2S·s(t)` where `S = c0 dt/dx` is the Courant
    /// number; in 1D that launches waves of amplitude ≈ `s(t)` in both
    /// directions for any `S` (at the default `S = 1/2` the factor is 1).
    /// A hard source overwrites the cell with `s(t)`.
    pub fn inject_source(&mut self, source: &SourceSpec, t: f64) {
        let value = source.value(t);
        match source.kind {
            SourceKind::Soft => {
                let courant = SPEED_OF_LIGHT * self.dt / self.dx;
                self.ex[source.cell] += 2.0 * courant * value;
            }
            SourceKind::Hard => self.ex[source.cell] = value,
        }
    }

    pub fn all_finite(&self) -> bool {
        self.ex.iter().chain(&self.by).all(|v| v.is_finite())
    }

    /// Electromagnetic energy per unit area, J/m², using `By` averaged to
    /// the integer time level from `by_prev` (n−1/2) and the current `by`
    /// (n+1/2) as `B^{n−1/2}·B^{n+1/2}`, which the leapfrog conserves.
    pub fn energy(&self, by_prev: &[f64]) -> f64 {
        let e: f64 = self.ex.iter().map(|v| v * v).sum::<f64>() * 0.5 * VACUUM_PERMITTIVITY;
        let b: f64 = self.by.iter().zip(by_prev).map(|(a, b)| a * b).sum::<f64>() * 0.5 / VACUUM_PERMEABILITY;
        (e + b) * self.dx
    }
}

/// Temporal envelope of a source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Envelope {
    /// Half-cosine rise from 0 to 1 over `ramp_time`, then constant.
    Ramp { ramp_time: f64 },
    /// `exp(−(t − center)²/(2 width²))`; the carrier phase is referenced to
    /// `center` so the pulse is symmetric.
    Gaussian { center: f64, width: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    pub cell: usize,
    /// E0, V/m.
    pub amplitude: f64,
    /// ω_in, rad/s.
    pub angular_frequency: f64,
    pub envelope: Envelope,
    pub kind: SourceKind,
}

impl SourceSpec {
    pub fn continuous(cell: usize, amplitude: f64, angular_frequency: f64, ramp_time: f64) -> Result<Self> {
        if !(angular_frequency > 0.0) {
            return Err(Error::invalid("source_angular_frequency", "must be positive"));
        }
        if !(ramp_time >= 0.0) {
            return Err(Error::invalid("source_ramp", "must be non-negative"));
        }
        Ok(SourceSpec {
            cell,
            amplitude,
            angular_frequency,
            envelope: Envelope::Ramp { ramp_time },
            kind: SourceKind::Soft,
        })
    }

    /// Gaussian pulse whose spectral amplitude has the given FWHM (rad/s).
    /// The pulse peaks five standard deviations after t = 0.
    pub fn gaussian(cell: usize, amplitude: f64, angular_frequency: f64, fwhm_bandwidth: f64) -> Result<Self> {
        if !(angular_frequency > 0.0 && fwhm_bandwidth > 0.0) {
            return Err(Error::invalid("pulse", "frequency and bandwidth must be positive"));
        }
        // |E(ω)| ∝ exp(−width² (ω−ω0)²/2) has FWHM 2 sqrt(2 ln 2)/width
        let width = 2.0 * math::sqrt(2.0 * core::f64::consts::LN_2) / fwhm_bandwidth;
        Ok(SourceSpec {
            cell,
            amplitude,
            angular_frequency,
            envelope: Envelope::Gaussian { center: 5.0 * width, width },
            kind: SourceKind::Soft,
        })
    }

    pub fn with_kind(mut self, kind: SourceKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn envelope_at(&self, t: f64) -> f64 {
        match self.envelope {
            Envelope::Ramp { ramp_time } => {
                if t <= 0.0 {
                    0.0
                } else if t >= ramp_time {
                    1.0
                } else {
                    0.5 * (1.0 - math::cos(core::f64::consts::PI * t / ramp_time))
                }
            }
            Envelope::Gaussian { center, width } => {
                let x = (t - center) / width;
                math::exp(-0.5 * x * x)
            }
        }
    }

    /// Source field s(t), V/m.
    pub fn value(&self, t: f64) -> f64 {
        let phase = match self.envelope {
            Envelope::Ramp { .. } => self.angular_frequency * t,
            Envelope::Gaussian { center, .. } => self.angular_frequency * (t - center),
        };
        self.amplitude * self.envelope_at(t) * math::sin(phase)
    }

    /// Time after which the source is negligible (pulses) or steady (CW).
    pub fn settle_time(&self) -> f64 {
        match self.envelope {
            Envelope::Ramp { ramp_time } => ramp_time,
            Envelope::Gaussian { center, width } => center + 5.0 * width,
        }
    }
}
