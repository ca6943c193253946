mod common;

use std::f64::consts::PI;

use common::{angular_frequency_from_peaks, peak_times};
use mbfdtd_core::constants::{DEBYE_TO_CM, EV_TO_J, HBAR};
use mbfdtd_core::qlayers::{LevelStructure, QuantumLayer};

/// Drive one isolated cell with `E0 cos ωt` and return `(times, populations of level)`.
fn drive<const N: usize>(levels: LevelStructure<N>, e0: f64, omega: f64, dt: f64, duration: f64, level: usize, every: usize) -> Vec<f64> {
    let mut layer = QuantumLayer::new(levels, 0.0, None, vec![0]).unwrap();
    let steps = (duration / dt) as usize;
    let f = |t: f64| e0 * (omega * t).cos();
    let mut out = Vec::with_capacity(steps / every + 1);
    for n in 0..steps {
        let t = n as f64 * dt;
        layer.propagate(&[f(t)], &[f(t + 0.5 * dt)], &[f(t + dt)], dt).unwrap();
        if (n + 1) % every == 0 {
            out.push(layer.rho[0].population(level));
        }
    }
    out
}

#[test]
fn resonant_two_level_rabi_frequency() {
    let e1 = 1.55 * EV_TO_J;
    let mu = 10.0 * DEBYE_TO_CM;
    let e0 = 0.002 * EV_TO_J / mu;
    let rabi = mu * e0 / HBAR;
    let levels = LevelStructure::ladder([0.0, e1], &[mu]).unwrap();
    let dt = 4e-18;
    let every = 100;
    let pop = drive(levels, e0, e1 / HBAR, dt, 10.5 * 2.0 * PI / rabi, 1, every);
    let peaks = peak_times(&pop, dt * every as f64, 0.1);
    assert!(peaks.len() >= 10, "{} peaks", peaks.len());
    let measured = angular_frequency_from_peaks(&peaks);
    assert!((measured / rabi - 1.0).abs() < 0.02, "measured {measured:e}, expected {rabi:e}");
}

#[test]
fn two_photon_rabi_frequency_scales_with_field_squared() {
    // |0> -> |2> through the off-resonant |1>, driven at half the 0-2 gap
    let mu = 10.0 * DEBYE_TO_CM;
    let levels = LevelStructure::ladder([0.0, 2.0 * EV_TO_J, 3.0 * EV_TO_J], &[mu, mu]).unwrap();
    let omega = 1.5 * EV_TO_J / HBAR;
    let dt = 4e-18;
    let every = 250;
    let freq = |e0: f64, duration: f64| {
        let pop = drive(levels, e0, omega, dt, duration, 2, every);
        let top = pop.iter().cloned().fold(0.0, f64::max);
        let peaks = peak_times(&pop, dt * every as f64, 0.2 * top);
        assert!(peaks.len() >= 3, "{} peaks at {e0:e} V/m", peaks.len());
        angular_frequency_from_peaks(&peaks)
    };
    let slow = freq(3e8, 4e-12);
    let fast = freq(6e8, 1e-12);
    assert!((fast / slow / 4.0 - 1.0).abs() < 0.1, "ratio {}", fast / slow);
}
