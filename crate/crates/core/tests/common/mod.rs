//! Closed-form oracles and measurement protocols shared by the integration
//! tests. Nothing here calls into the engine's own analysis code.
#![allow(dead_code)]

use std::f64::consts::PI;

use mbfdtd_core::constants::{ev_to_angular_frequency, SPEED_OF_LIGHT};
use mbfdtd_core::fdtd::{build_pml_profile, SourceSpec};
use mbfdtd_core::media::DrudeMedium;
use mbfdtd_core::Simulation;
use num_complex::Complex64;

pub const GOLD_PLASMA_EV: f64 = 7.039;
pub const GOLD_DAMPING_EV: f64 = 0.1809;

/// `1 − ω_d²/(ω² + iΓω)` for an `exp(−iωt)` convention.
pub fn drude_eps(plasma: f64, damping: f64, omega: f64) -> Complex64 {
    Complex64::new(1.0, 0.0) - plasma * plasma / Complex64::new(omega * omega, damping * omega)
}

/// Intensity reflectance and transmittance of a homogeneous slab in vacuum
/// at normal incidence (two-interface Airy sum).
pub fn slab_rt(eps: Complex64, thickness: f64, omega: f64) -> (f64, f64) {
    let mut n = eps.sqrt();
    if n.im < 0.0 {
        n = -n;
    }
    let one = Complex64::new(1.0, 0.0);
    let delta = n * omega / SPEED_OF_LIGHT * thickness;
    let r12 = (one - n) / (one + n);
    let r23 = (n - one) / (n + one);
    let t12 = 2.0 / (one + n);
    let t23 = 2.0 * n / (n + one);
    let phase2 = (Complex64::i() * 2.0 * delta).exp();
    let denom = one + r12 * r23 * phase2;
    let r = (r12 + r23 * phase2) / denom;
    let t = t12 * t23 * (Complex64::i() * delta).exp() / denom;
    (r.norm_sqr(), t.norm_sqr())
}

/// `Σ x_k exp(−iω t_k) Δt` with `t_k = t0 + kΔt`.
pub fn dft(values: &[f64], dt: f64, t0: f64, omega: f64) -> Complex64 {
    values
        .iter()
        .enumerate()
        .map(|(k, &x)| {
            let p = -omega * (t0 + k as f64 * dt);
            Complex64::new(p.cos(), p.sin()) * x
        })
        .sum::<Complex64>()
        * dt
}

/// Wrap a phase into (−π, π].
pub fn wrap(phi: f64) -> f64 {
    let mut p = phi % (2.0 * PI);
    if p <= -PI {
        p += 2.0 * PI;
    } else if p > PI {
        p -= 2.0 * PI;
    }
    p
}

pub fn vacuum(cells: usize, dx: f64) -> Simulation {
    let dt = dx / (2.0 * SPEED_OF_LIGHT);
    let pml = build_pml_profile(64, 3.0, 1e-8, dx).unwrap();
    Simulation::new(cells, dx, dt, &pml).unwrap()
}

#[derive(Debug, Clone, Copy)]
pub struct PlaneWave {
    /// Amplitude at the near probe over the source amplitude.
    pub launched: f64,
    /// Amplitude at the far probe over the near probe.
    pub carried: f64,
    /// Measured phase velocity over c0, minus one.
    pub phase_velocity_error: f64,
}

/// CW wave at `energy_ev` from a soft source, observed at two probes
/// `distance` apart. Amplitude and phase come from a DFT over `cycles`
/// whole periods once the far probe is steady.
pub fn plane_wave(dx: f64, energy_ev: f64, distance: f64, cycles: usize) -> PlaneWave {
    let gap = (distance / dx).round() as usize;
    let pad = 64 + 200;
    let cells = 2 * pad + gap + 100;
    let mut sim = vacuum(cells, dx);
    let w = ev_to_angular_frequency(energy_ev);
    let period = 2.0 * PI / w;
    let source = pad;
    let near = source + 100;
    let far = near + gap;
    sim.add_source(SourceSpec::continuous(source, 1.0, w, 10.0 * period).unwrap()).unwrap();
    let dt = sim.dt();
    let start = 10.0 * period + (far - source) as f64 * dx / SPEED_OF_LIGHT + 5.0 * period;
    let first = (start / dt).ceil() as u64;
    let count = (cycles as f64 * period / dt).round() as usize;
    sim.run(first, 1 << 20).unwrap();
    let (mut a, mut b) = (Vec::with_capacity(count), Vec::with_capacity(count));
    for _ in 0..count {
        a.push(sim.fields().ex[near]);
        b.push(sim.fields().ex[far]);
        sim.step().unwrap();
    }
    let t0 = first as f64 * dt;
    let window = count as f64 * dt;
    let fa = dft(&a, dt, t0, w);
    let fb = dft(&b, dt, t0, w);
    let d = gap as f64 * dx;
    let k_exact = w / SPEED_OF_LIGHT;
    let k = (k_exact * d + wrap((fa.arg() - fb.arg()) - k_exact * d)) / d;
    PlaneWave {
        launched: 2.0 * fa.norm() / window,
        carried: fb.norm() / fa.norm(),
        phase_velocity_error: k_exact / k - 1.0,
    }
}

/// Reflectance and transmittance of a gold slab measured with a Gaussian
/// pulse, each relative to the same pulse on an empty grid.
pub fn drude_slab(dx: f64, thickness: f64, energies_ev: &[f64]) -> Vec<(f64, f64)> {
    let slab = (thickness / dx).round() as usize;
    let margin = (300e-9 / dx).round() as usize;
    let cells = 2 * (64 + margin) + slab;
    let source = 64 + 20;
    let reflect = 64 + margin / 2;
    let transmit = 64 + margin + slab + margin / 2;
    let omegas: Vec<f64> = energies_ev.iter().map(|&e| ev_to_angular_frequency(e)).collect();
    let pulse = SourceSpec::gaussian(source, 1.0, ev_to_angular_frequency(1.5), ev_to_angular_frequency(1.5)).unwrap();
    let total = pulse.settle_time() + 3.0 * cells as f64 * dx / SPEED_OF_LIGHT + 60e-15;

    let record = |with_slab: bool| {
        let mut sim = vacuum(cells, dx);
        if with_slab {
            let gold = DrudeMedium::new(
                ev_to_angular_frequency(GOLD_PLASMA_EV),
                ev_to_angular_frequency(GOLD_DAMPING_EV),
                64 + margin..64 + margin + slab,
            )
            .unwrap();
            sim.add_drude(gold).unwrap();
        }
        sim.add_source(pulse).unwrap();
        let steps = (total / sim.dt()).ceil() as usize;
        let (mut r, mut t) = (Vec::with_capacity(steps), Vec::with_capacity(steps));
        for _ in 0..steps {
            sim.step().unwrap();
            r.push(sim.fields().ex[reflect]);
            t.push(sim.fields().ex[transmit]);
        }
        (r, t, sim.dt())
    };
    let (r_vac, t_vac, dt) = record(false);
    let (r_slab, t_slab, _) = record(true);
    let reflected: Vec<f64> = r_slab.iter().zip(&r_vac).map(|(a, b)| a - b).collect();
    omegas
        .iter()
        .map(|&w| {
            let inc_r = dft(&r_vac, dt, dt, w);
            let inc_t = dft(&t_vac, dt, dt, w);
            let refl = dft(&reflected, dt, dt, w);
            let trans = dft(&t_slab, dt, dt, w);
            ((refl / inc_r).norm_sqr(), (trans / inc_t).norm_sqr())
        })
        .collect()
}

/// Times of the maxima of an oscillating record, found with a hysteresis
/// `band` so that small ripple does not count as a new extremum.
pub fn peak_times(values: &[f64], dt: f64, band: f64) -> Vec<f64> {
    let mut peaks = Vec::new();
    let (mut rising, mut best, mut at, mut low) = (true, f64::NEG_INFINITY, 0usize, f64::INFINITY);
    for (k, &v) in values.iter().enumerate() {
        if rising {
            if v > best {
                best = v;
                at = k;
            } else if v < best - band {
                peaks.push(at as f64 * dt);
                rising = false;
                low = v;
            }
        } else if v < low {
            low = v;
        } else if v > low + band {
            rising = true;
            best = v;
            at = k;
        }
    }
    peaks
}

/// Mean angular frequency implied by successive peak times.
pub fn angular_frequency_from_peaks(peaks: &[f64]) -> f64 {
    let n = peaks.len() - 1;
    2.0 * PI * n as f64 / (peaks[n] - peaks[0])
}
