//! Single runs: time-step a scenario, record the standard series and derive
//! the scalar metrics.

use std::collections::BTreeMap;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use mbfdtd_core::observables::{
    detect_steady_state, field_envelope, Recorder, TimeSeries, EX_GAP_MAX, EX_SOLUTE, RHO_11, RHO_1P1P, RHO_22,
};
use mbfdtd_core::{ScenarioSpec, Simulation};

use crate::config::ConfigError;
use crate::output::RunWriter;
use crate::spectrum::{spectrum, Spectrum, Window};

/// Runs longer than this need `allow_long`.
pub const MAX_STEPS_WITHOUT_OVERRIDE: u64 = 1_000_000_000;
/// Samples kept in the diagnostic dump of a failed run.
pub const DUMP_SAMPLES: usize = 100;
/// Fraction of the record treated as the late-time ("steady") tail.
pub const TAIL_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides the spec's decimation.
    pub decimation: Option<usize>,
    pub allow_long: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{steps} steps exceed the {MAX_STEPS_WITHOUT_OVERRIDE} step limit; pass --allow-long to run anyway")]
    TooLong { steps: u64 },
    #[error("numerical failure at step {step}: {source}")]
    Numerical {
        step: u64,
        source: mbfdtd_core::Error,
        /// Last recorded samples of every series.
        last_samples: Vec<(String, Vec<f64>)>,
    },
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
}

impl RunError {
    /// Process exit code: 1 for configuration problems, 2 for failures
    /// while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::TooLong { .. } => 1,
            RunError::Numerical { .. } | RunError::Io(_) => 2,
        }
    }
}

impl From<mbfdtd_core::Error> for RunError {
    fn from(e: mbfdtd_core::Error) -> Self {
        RunError::Config(ConfigError::Invalid(e))
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub spec: ScenarioSpec,
    pub series: Vec<TimeSeries>,
    pub spectra: Vec<Spectrum>,
    pub metrics: BTreeMap<String, f64>,
    pub steps: u64,
    pub wall_clock_s: f64,
}

impl RunResult {
    pub fn series(&self, name: &str) -> Option<&TimeSeries> {
        self.series.iter().find(|s| s.label == name)
    }

    /// Write every series, spectrum and the manifest into `dir`.
    pub fn write(&self, dir: &Path) -> io::Result<PathBuf> {
        let mut w = RunWriter::create(dir)?;
        for s in &self.series {
            w.series(s)?;
        }
        for s in &self.spectra {
            w.spectrum(s)?;
        }
        w.finish(&self.spec, self.metrics.clone(), self.steps, self.wall_clock_s)?;
        Ok(dir.join(crate::output::MANIFEST_FILE))
    }
}

/// Spec with the run options applied, checked against the step guard.
pub fn prepare(spec: &ScenarioSpec, opts: &RunOptions) -> Result<ScenarioSpec, RunError> {
    let mut spec = spec.clone();
    if let Some(k) = opts.decimation {
        spec.decimation = k;
    }
    spec.validate()?;
    let steps = spec.step_count();
    if steps > MAX_STEPS_WITHOUT_OVERRIDE && !opts.allow_long {
        return Err(RunError::TooLong { steps });
    }
    Ok(spec)
}

pub fn run_scenario(spec: &ScenarioSpec, opts: &RunOptions) -> Result<RunResult, RunError> {
    let spec = prepare(spec, opts)?;
    let started = Instant::now();
    let mut sim = Simulation::from_spec(&spec)?;
    let domain = sim.domain().cloned().expect("from_spec sets the domain");
    for w in &domain.warnings {
        log::warn!(
            "{} snapped from {:.4} nm to {:.4} nm",
            w.what,
            w.requested * 1e9,
            w.realized * 1e9
        );
    }
    let mut rec = Recorder::new(&domain, spec.scenario.has_solvent(), spec.timestep, spec.decimation)?;
    rec.sample(&sim);
    let steps = spec.step_count();
    let report_every = (steps / 10).max(1);
    for n in 1..=steps {
        let failure = match sim.step() {
            Err(e) => Some(e),
            Ok(()) => {
                if rec.sample(&sim) && !sim.fields().all_finite() {
                    Some(mbfdtd_core::Error::NonFiniteField { step: sim.time_index() })
                } else {
                    None
                }
            }
        };
        if let Some(source) = failure {
            return Err(RunError::Numerical { step: sim.time_index(), source, last_samples: rec.last_samples(DUMP_SAMPLES) });
        }
        if n % report_every == 0 {
            log::info!("step {n}/{steps}");
        }
    }
    let mut series = rec.into_series();
    let period = 2.0 * std::f64::consts::PI / spec.source.angular_frequency;
    let envelope = series
        .iter()
        .find(|s| s.label == EX_SOLUTE)
        .and_then(|s| field_envelope(s, period).ok())
        .map(|mut e| {
            e.label = format!("{EX_SOLUTE}_envelope");
            e
        });
    let metrics = metrics(&spec, &series, envelope.as_ref(), period);
    series.extend(envelope);
    let spectra = series
        .iter()
        .filter(|s| s.label == EX_SOLUTE)
        .filter_map(|s| spectrum(s, Window::Hann))
        .collect();
    Ok(RunResult { spec, series, spectra, metrics, steps, wall_clock_s: started.elapsed().as_secs_f64() })
}

fn tail(s: &TimeSeries) -> &[f64] {
    let from = ((1.0 - TAIL_FRACTION) * s.len() as f64) as usize;
    &s.values[from.min(s.len())..]
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| f64::max(m, x.abs()))
}

fn metrics(spec: &ScenarioSpec, series: &[TimeSeries], envelope: Option<&TimeSeries>, period: f64) -> BTreeMap<String, f64> {
    let mut m = BTreeMap::new();
    let find = |name: &str| series.iter().find(|s| s.label == name);
    for name in [RHO_11, RHO_22, RHO_1P1P] {
        if let Some(s) = find(name) {
            m.insert(format!("final_{name}"), s.values.last().copied().unwrap_or(0.0));
            m.insert(format!("max_{name}"), s.values.iter().fold(0.0, |a, &b| f64::max(a, b)));
        }
    }
    if let Some(s) = find(EX_GAP_MAX) {
        m.insert("max_circulating_field".into(), max_abs(tail(s)));
        m.insert("peak_gap_field".into(), max_abs(&s.values));
    }
    if let Some(s) = find(EX_SOLUTE) {
        m.insert("max_solute_field".into(), max_abs(tail(s)));
    }
    if let Some(env) = envelope {
        if let Some(i) = detect_steady_state(env, 1e-3, 10.0 * period) {
            let incident = spec.source.effective_amplitude();
            m.insert("steady_state_time_s".into(), env.time_at(i));
            if incident > 0.0 {
                let late = env.tail_from(env.time_at(i));
                let mean = late.iter().sum::<f64>() / late.len().max(1) as f64;
                m.insert("field_enhancement".into(), mean / incident);
            }
        }
    }
    m
}

/// Write the last recorded samples of a failed run as one CSV with a
/// column per series.
pub fn write_failure_dump(dir: &Path, err: &RunError) -> io::Result<Option<PathBuf>> {
    let RunError::Numerical { step, last_samples, .. } = err else { return Ok(None) };
    std::fs::create_dir_all(dir)?;
    let rows = last_samples.iter().map(|(_, v)| v.len()).max().unwrap_or(0);
    let mut out = format!("failed_at_step={step}\n");
    out.push_str(&last_samples.iter().map(|(n, _)| n.as_str()).collect::<Vec<_>>().join(","));
    out.push('\n');
    for r in 0..rows {
        let cells: Vec<String> = last_samples.iter().map(|(_, v)| v.get(r).map(|x| format!("{x:e}")).unwrap_or_default()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    let path = dir.join("failure_dump.csv");
    std::fs::write(&path, out)?;
    Ok(Some(path))
}
