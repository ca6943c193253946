//! Cavity field enhancement and steady-state detection.

use mbfdtd_core::calibration::measure_enhancement;
use mbfdtd_core::constants::ev_to_angular_frequency;
use mbfdtd_core::observables::{detect_steady_state, TimeSeries};
use mbfdtd_core::{ScenarioSpec, ScenarioTag};

fn cavity(dx: f64, amplitude: f64) -> ScenarioSpec {
    ScenarioSpec::new(ScenarioTag::C, amplitude, 0.3e-12).with_resolution(dx)
}

#[test]
fn without_mirrors_the_enhancement_is_one() {
    let mut s = cavity(1e-9, 1e6);
    s.mirror_thickness = 0.0;
    assert_eq!(measure_enhancement(&s, 1e-3).unwrap(), 1.0);
}

#[test]
fn enhancement_does_not_depend_on_the_drive() {
    let full = measure_enhancement(&cavity(1e-9, 1e6), 1e-3).unwrap();
    let half = measure_enhancement(&cavity(1e-9, 0.5e6), 1e-3).unwrap();
    assert!(full > 1.5, "{full}");
    assert!((full - half).abs() / full < 0.01, "{full} vs {half}");
}

#[test]
fn detuned_drive_is_not_enhanced() {
    let mut s = cavity(1e-9, 1e6);
    s.source.angular_frequency = ev_to_angular_frequency(1.2);
    s.source.ramp_time = 10.0 * 2.0 * std::f64::consts::PI / s.source.angular_frequency;
    let off = measure_enhancement(&s, 1e-3).unwrap();
    assert!(off < 1.0, "{off}");
}

fn series(values: Vec<f64>) -> TimeSeries {
    TimeSeries::from_values("x", "1", 1.0, values)
}

#[test]
fn steady_state_of_a_settling_exponential() {
    let s = series((0..4000).map(|i| 1.0 - (-(i as f64) / 200.0).exp()).collect());
    let i = detect_steady_state(&s, 1e-3, 100.0).unwrap();
    // e^{−t/200} drops under ~1e-3 of the level near t = 1400
    assert!((1000..2000).contains(&i), "{i}");
}

#[test]
fn growing_signal_never_settles() {
    let s = series((0..4000).map(|i| i as f64).collect());
    assert_eq!(detect_steady_state(&s, 1e-3, 100.0), None);
}

#[test]
fn silent_signal_is_steady_from_the_start() {
    assert_eq!(detect_steady_state(&series(vec![0.0; 500]), 1e-3, 50.0), Some(0));
}

#[test]
fn solvent_absorbs_at_its_transition() {
    // weak-field response of the two-level solvent alone: a Lorentzian dip
    // in transmission at E0'1' = 1.55 eV
    use mbfdtd_core::calibration::{energy_grid, transmission_spectrum, ProbePulse};
    let mut s = ScenarioSpec::new(ScenarioTag::B, 1e6, 2e-12).with_resolution(1e-9);
    s.solute.density = 0.0;
    s.solvent.density = 1e26;
    let energies = energy_grid(1.40, 1.70, 0.001);
    let t = transmission_spectrum(&s, &energies, &ProbePulse::default()).unwrap();
    let (i, lowest) = t.iter().enumerate().fold((0, f64::MAX), |b, (i, &v)| if v < b.1 { (i, v) } else { b });
    assert!((energies[i] - 1.55).abs() <= 0.002, "dip at {} eV", energies[i]);
    assert!(lowest < 0.9, "dip depth {lowest}");
    // far wings are transparent and the line is symmetric about its center
    assert!(t[0] > 0.99 && t[t.len() - 1] > 0.99, "{} {}", t[0], t[t.len() - 1]);
    let half = 1.0 - 0.5 * (1.0 - lowest);
    let left = (0..i).rev().find(|&k| t[k] > half).unwrap();
    let right = (i..t.len()).find(|&k| t[k] > half).unwrap();
    assert!(((i - left) as i64 - (right - i) as i64).abs() <= 2, "{left} {i} {right}");
}
