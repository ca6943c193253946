//! Built-in oracle suite behind `--seed-check`: a few seconds of closed-form
//! checks that the engine and its constants are sane on this machine.

use std::f64::consts::PI;

use mbfdtd_core::constants::{ev_to_angular_frequency, DEBYE_TO_CM, EV_TO_J, HBAR, SPEED_OF_LIGHT};
use mbfdtd_core::fdtd::{build_pml_profile, SourceSpec};
use mbfdtd_core::media::{drude_permittivity, DrudeMedium};
use mbfdtd_core::qlayers::{LevelStructure, QuantumLayer};
use mbfdtd_core::{PhysicalConstants, ScenarioSpec, Simulation};
use rustfft::num_complex::Complex64;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, value: f64, limit: f64, what: &str) -> Check {
    Check { name, passed: value.is_finite() && value < limit, detail: format!("{what} = {value:.3e} (limit {limit:.0e})") }
}

pub fn light_speed() -> Check {
    check("c0 = 1/sqrt(eps0 mu0)", PhysicalConstants::SI.light_speed_consistency(), 1e-12, "relative error")
}

pub fn default_timestep() -> Check {
    let dt = ScenarioSpec::default_timestep(0.1e-9);
    check("default dt at dx = 0.1 nm", (dt - 1.6678e-19).abs() / 1.6678e-19, 1e-4, "relative error")
}

pub fn debye() -> Check {
    check("10 debye in C m", (10.0 * DEBYE_TO_CM - 3.3356e-29).abs() / 3.3356e-29, 1e-4, "relative error")
}

pub fn drude_formula() -> Check {
    let wd = ev_to_angular_frequency(7.039);
    let gd = ev_to_angular_frequency(0.1809);
    let w = ev_to_angular_frequency(1.5);
    let gold = DrudeMedium::new(wd, gd, 0..1).expect("valid medium");
    let eps = drude_permittivity(&gold, w).expect("nonzero frequency");
    let expected = Complex64::new(1.0, 0.0) - wd * wd / Complex64::new(w * w, gd * w);
    check("Drude permittivity at 1.5 eV", (eps - expected).norm() / expected.norm(), 1e-12, "relative error")
}

/// Resonant two-level cell under `E0 cos ωt`: the excited population first
/// peaks after half a Rabi period `πħ/(μE0)`.
pub fn rabi_half_period() -> Check {
    let e1 = 1.55 * EV_TO_J;
    let mu = 10.0 * DEBYE_TO_CM;
    let e0 = 0.005 * EV_TO_J / mu;
    let w = e1 / HBAR;
    let levels = LevelStructure::ladder([0.0, e1], &[mu]).expect("valid ladder");
    let mut layer = QuantumLayer::new(levels, 0.0, None, vec![0]).expect("valid layer");
    let dt = 2e-18;
    let half = PI * HBAR / (mu * e0);
    let steps = (1.3 * half / dt) as usize;
    let (mut best, mut at) = (0.0, 0.0);
    for n in 0..steps {
        let t = n as f64 * dt;
        let f = |t: f64| e0 * (w * t).cos();
        layer.propagate(&[f(t)], &[f(t + 0.5 * dt)], &[f(t + dt)], dt).expect("finite input");
        let p = layer.rho[0].population(1);
        if p > best {
            best = p;
            at = t + dt;
        }
    }
    check("two-level Rabi half period", (at - half).abs() / half, 0.02, "relative error")
}

/// Probe trace of a Gaussian pulse launched from the middle of a vacuum
/// grid with `margin` extra cells on each side.
fn pulse_trace(core_cells: usize, margin: usize, dx: f64, total: f64) -> Vec<f64> {
    let dt = dx / (2.0 * SPEED_OF_LIGHT);
    let pml = build_pml_profile(64, 3.0, 1e-8, dx).expect("valid profile");
    let mut sim = Simulation::new(core_cells + 2 * margin, dx, dt, &pml).expect("valid grid");
    let src = SourceSpec::gaussian(margin + core_cells / 2, 1.0, ev_to_angular_frequency(1.5), ev_to_angular_frequency(0.5))
        .expect("valid pulse");
    sim.add_source(src).expect("source in grid");
    let probe = margin + core_cells * 7 / 10;
    let mut out = Vec::new();
    while sim.time() < total {
        sim.step().expect("vacuum step");
        out.push(sim.fields().ex[probe]);
    }
    out
}

/// Gaussian pulse leaving a vacuum grid through the PML, compared with the
/// same run on a grid wide enough that nothing returns in time.
pub fn pml_reflection() -> Check {
    let (dx, cells) = (2e-9, 1000);
    let src = SourceSpec::gaussian(0, 1.0, ev_to_angular_frequency(1.5), ev_to_angular_frequency(0.5)).expect("valid pulse");
    let total = src.settle_time() + 2.0 * cells as f64 * dx / SPEED_OF_LIGHT;
    let margin = (SPEED_OF_LIGHT * total / dx) as usize;
    let small = pulse_trace(cells, 0, dx, total);
    let wide = pulse_trace(cells, margin, dx, total);
    let peak = wide.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let diff = small.iter().zip(&wide).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    check("PML reflection amplitude", diff / peak, 1e-4, "|r|")
}

pub fn all() -> Vec<Check> {
    vec![light_speed(), default_timestep(), debye(), drude_formula(), rabi_half_period(), pml_reflection()]
}
