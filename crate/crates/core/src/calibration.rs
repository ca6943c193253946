//! Linear-response calibration runs: pulse transmission spectra, polariton
//! peaks, solvent-density tuning and the CW field enhancement.

use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::{angular_frequency_to_ev, ev_to_angular_frequency};
use crate::engine::Simulation;
use crate::error::{Error, Result};
use crate::fdtd::SourceSpec;
use crate::math;
use crate::observables::{
    field_enhancement, field_envelope, local_maxima, parabolic_peak, Recorder, TimeSeries, EX_SOLUTE,
};
use crate::scenario::{ScenarioSpec, ScenarioTag};

/// Gaussian probe pulse settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbePulse {
    pub center_ev: f64,
    pub fwhm_ev: f64,
    /// Peak amplitude as a fraction of the spec's CW amplitude (1 V/m when
    /// the CW amplitude is zero).
    pub relative_amplitude: f64,
}

impl Default for ProbePulse {
    fn default() -> Self {
        ProbePulse { center_ev: 1.5, fwhm_ev: 0.5, relative_amplitude: 1e-3 }
    }
}

/// Uniform photon-energy grid, eV.
pub fn energy_grid(from_ev: f64, to_ev: f64, step_ev: f64) -> Vec<f64> {
    let n = math::round((to_ev - from_ev) / step_ev) as usize;
    (0..=n).map(|k| from_ev + k as f64 * step_ev).collect()
}

/// Field at the transmission probe for a pulsed run of `spec`, recorded
/// every `decimation` steps.
pub fn pulse_response(spec: &ScenarioSpec, pulse: &ProbePulse, decimation: usize) -> Result<TimeSeries> {
    let mut sim = Simulation::from_spec(spec)?;
    let domain = sim.domain().cloned().ok_or_else(|| Error::invalid("domain", "missing"))?;
    let cw = spec.source.effective_amplitude();
    let amplitude = if cw > 0.0 { cw * pulse.relative_amplitude } else { 1.0 };
    let source = SourceSpec::gaussian(
        domain.source_cell,
        amplitude,
        ev_to_angular_frequency(pulse.center_ev),
        ev_to_angular_frequency(pulse.fwhm_ev),
    )?
    .with_kind(spec.source.kind);
    sim.set_sources(alloc::vec![source])?;
    let decimation = decimation.max(1);
    let mut out = TimeSeries::new("ex_transmitted", "V/m", spec.timestep * decimation as f64, 0.0);
    let steps = spec.step_count();
    for n in 0..=steps {
        if n % decimation as u64 == 0 {
            out.values.push(sim.fields().ex[domain.transmission_probe]);
        }
        if n < steps {
            sim.step()?;
        }
        if n % 4096 == 0 && !sim.fields().all_finite() {
            return Err(Error::NonFiniteField { step: sim.time_index() });
        }
    }
    Ok(out)
}

/// `Σ x_k e^{iωt_k} Δt` at each photon energy (eV).
pub fn fourier_at(series: &TimeSeries, energies_ev: &[f64]) -> Vec<Complex64> {
    energies_ev
        .iter()
        .map(|&e| {
            let w = ev_to_angular_frequency(e) * series.sample_interval;
            // rotate a unit phasor; re-anchor every 1024 samples against drift
            let mut sum = Complex64::new(0.0, 0.0);
            let step = Complex64::new(math::cos(w), math::sin(w));
            let mut phasor = Complex64::new(1.0, 0.0);
            for (k, &x) in series.values.iter().enumerate() {
                if k % 1024 == 0 {
                    let p = w * k as f64;
                    phasor = Complex64::new(math::cos(p), math::sin(p));
                }
                sum += phasor * x;
                phasor *= step;
            }
            let t0 = ev_to_angular_frequency(e) * series.start_time;
            sum * Complex64::new(math::cos(t0), math::sin(t0)) * series.sample_interval
        })
        .collect()
}

/// Decimation that keeps ≥ 32 samples per period at `max_ev`.
fn spectral_decimation(spec: &ScenarioSpec, max_ev: f64) -> usize {
    let period = 2.0 * core::f64::consts::PI / ev_to_angular_frequency(max_ev);
    ((period / 32.0 / spec.timestep) as usize).max(1)
}

/// Same grid and source position with every material removed.
pub fn vacuum_reference(spec: &ScenarioSpec) -> ScenarioSpec {
    let mut r = spec.clone();
    r.mirror_thickness = 0.0;
    r.solute.density = 0.0;
    r.solvent.density = 0.0;
    r
}

/// Intensity transmission `|E_t(ω)/E_ref(ω)|²` on `energies_ev`, the
/// reference being the same pulse through the empty grid.
pub fn transmission_spectrum(spec: &ScenarioSpec, energies_ev: &[f64], pulse: &ProbePulse) -> Result<Vec<f64>> {
    let reference = reference_spectrum(spec, energies_ev, pulse)?;
    transmission_against(spec, energies_ev, pulse, &reference)
}

fn reference_spectrum(spec: &ScenarioSpec, energies_ev: &[f64], pulse: &ProbePulse) -> Result<Vec<Complex64>> {
    let max_ev = energies_ev.iter().fold(0.0f64, |m, &e| m.max(e));
    let k = spectral_decimation(spec, max_ev);
    Ok(fourier_at(&pulse_response(&vacuum_reference(spec), pulse, k)?, energies_ev))
}

fn transmission_against(
    spec: &ScenarioSpec,
    energies_ev: &[f64],
    pulse: &ProbePulse,
    reference: &[Complex64],
) -> Result<Vec<f64>> {
    let max_ev = energies_ev.iter().fold(0.0f64, |m, &e| m.max(e));
    let k = spectral_decimation(spec, max_ev);
    let through = fourier_at(&pulse_response(spec, pulse, k)?, energies_ev);
    Ok(through
        .iter()
        .zip(reference)
        .map(|(t, r)| (t / r).norm_sqr())
        .collect())
}

/// Refined peak positions (eV) and heights of a sampled spectrum, keeping
/// maxima above `threshold` times the global maximum.
pub fn spectral_peaks(energies_ev: &[f64], values: &[f64], threshold: f64) -> Vec<(f64, f64)> {
    let top = values.iter().fold(0.0f64, |m, &v| m.max(v));
    let step = if energies_ev.len() > 1 { energies_ev[1] - energies_ev[0] } else { 0.0 };
    local_maxima(values, threshold * top)
        .into_iter()
        .map(|i| (energies_ev[0] + parabolic_peak(values, i) * step, values[i]))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolaritonCalibration {
    pub lower_ev: f64,
    pub upper_ev: f64,
    pub cavity_ev: f64,
    /// Solvent density used, m⁻³.
    pub solvent_density: f64,
}

impl PolaritonCalibration {
    pub fn midpoint_ev(&self) -> f64 {
        0.5 * (self.lower_ev + self.upper_ev)
    }

    pub fn splitting_ev(&self) -> f64 {
        self.upper_ev - self.lower_ev
    }
}

/// Polariton calibration on a scenario-D geometry with the solute removed.
///
/// The empty-cavity spectrum (solvent density 0) and the vacuum reference
/// are computed once; each [`Self::measure`] then costs one run.
#[derive(Debug, Clone)]
pub struct PolaritonCalibrator {
    spec: ScenarioSpec,
    energies: Vec<f64>,
    pulse: ProbePulse,
    reference: Vec<Complex64>,
    pub cavity_ev: f64,
    pub cavity_spectrum: Vec<f64>,
}

impl PolaritonCalibrator {
    pub fn new(spec: &ScenarioSpec, energies_ev: Vec<f64>, pulse: ProbePulse) -> Result<Self> {
        if spec.scenario != ScenarioTag::D {
            return Err(Error::invalid("scenario", "polariton calibration needs scenario D"));
        }
        let mut spec = spec.clone();
        spec.solute.density = 0.0;
        let reference = reference_spectrum(&spec, &energies_ev, &pulse)?;
        let mut empty = spec.clone();
        empty.solvent.density = 0.0;
        let cavity_spectrum = transmission_against(&empty, &energies_ev, &pulse, &reference)?;
        let peaks = spectral_peaks(&energies_ev, &cavity_spectrum, 0.5);
        let &(cavity_ev, _) = peaks
            .iter()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .ok_or_else(|| Error::invalid("calibration", "no cavity resonance inside the energy grid"))?;
        Ok(PolaritonCalibrator { spec, energies: energies_ev, pulse, reference, cavity_ev, cavity_spectrum })
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Transmission spectrum at solvent density `n0`.
    pub fn spectrum(&self, n0: f64) -> Result<Vec<f64>> {
        let mut s = self.spec.clone();
        s.solvent.density = n0;
        transmission_against(&s, &self.energies, &self.pulse, &self.reference)
    }

    /// Strongest transmission peak on each side of the empty-cavity
    /// resonance.
    pub fn measure(&self, n0: f64) -> Result<(PolaritonCalibration, Vec<f64>)> {
        let t = self.spectrum(n0)?;
        let peaks = spectral_peaks(&self.energies, &t, 0.05);
        let best = |below: bool| {
            peaks
                .iter()
                .filter(|(e, _)| if below { *e < self.cavity_ev } else { *e > self.cavity_ev })
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .map(|p| p.0)
        };
        match (best(true), best(false)) {
            (Some(lower_ev), Some(upper_ev)) => Ok((
                PolaritonCalibration { lower_ev, upper_ev, cavity_ev: self.cavity_ev, solvent_density: n0 },
                t,
            )),
            _ => Err(Error::invalid(
                "calibration",
                "polariton peaks not resolvable (splitting below the energy-grid resolution?)",
            )),
        }
    }

    /// Tune the solvent density until the lower polariton sits at
    /// `target_ev` within `tol_ev`. The splitting scales as `sqrt(n0)`, so
    /// each iteration rescales `n0` by the squared ratio of target and
    /// measured half-splittings about the measured midpoint.
    pub fn tune_lower_polariton(&self, start_n0: f64, target_ev: f64, tol_ev: f64, max_iter: usize) -> Result<PolaritonCalibration> {
        if !(start_n0 > 0.0) {
            return Err(Error::invalid("solvent_density", "tuning needs a positive starting density"));
        }
        let mut n0 = start_n0;
        for _ in 0..max_iter.max(1) {
            let (cal, _) = self.measure(n0)?;
            if math::abs(cal.lower_ev - target_ev) <= tol_ev {
                return Ok(cal);
            }
            let mid = cal.midpoint_ev();
            let have = mid - cal.lower_ev;
            let want = mid - target_ev;
            if !(have > 0.0 && want > 0.0) {
                return Err(Error::invalid("calibration", "target lies above the polariton midpoint"));
            }
            n0 *= (want / have) * (want / have);
        }
        Err(Error::invalid("calibration", "density tuning did not converge"))
    }
}

/// Run `spec` with a CW source and record the standard series.
pub fn record_run(spec: &ScenarioSpec, decimation: usize) -> Result<Recorder> {
    let mut sim = Simulation::from_spec(spec)?;
    let domain = sim.domain().cloned().ok_or_else(|| Error::invalid("domain", "missing"))?;
    let mut rec = Recorder::new(&domain, spec.scenario.has_solvent(), spec.timestep, decimation)?;
    rec.sample(&sim);
    for _ in 0..spec.step_count() {
        sim.step()?;
        if rec.sample(&sim) && !sim.fields().all_finite() {
            return Err(Error::NonFiniteField { step: sim.time_index() });
        }
    }
    Ok(rec)
}

/// Steady-state CW envelope at the solute cell of the empty structure,
/// divided by the same quantity with the mirrors removed.
///
/// Both runs drop the molecular densities so the ratio is a property of
/// the mirrors alone. Steady state is judged on envelope means over
/// ten-period windows with relative tolerance `rel_tol`.
pub fn measure_enhancement(spec: &ScenarioSpec, rel_tol: f64) -> Result<f64> {
    let mut inside = spec.clone();
    inside.solute.density = 0.0;
    inside.solvent.density = 0.0;
    let outside = vacuum_reference(spec);
    let period = 2.0 * core::f64::consts::PI / spec.source.angular_frequency;
    let decimation = ((period / 32.0 / spec.timestep) as usize).clamp(1, spec.decimation.max(1));
    let env = |s: &ScenarioSpec| -> Result<TimeSeries> {
        let rec = record_run(s, decimation)?;
        field_envelope(rec.get(EX_SOLUTE)?, period)
    };
    field_enhancement(&env(&inside)?, &env(&outside)?, rel_tol, 10.0 * period)
}

/// Convenience: photon energy (eV) of a spec's CW source.
pub fn source_energy_ev(spec: &ScenarioSpec) -> f64 {
    angular_frequency_to_ev(spec.source.angular_frequency)
}
