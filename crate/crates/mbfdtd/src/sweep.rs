//! Parameter sweeps: one isolated run per axis value, in parallel.

use std::collections::BTreeSet;
use std::fmt;
use std::io;
use std::path::Path;
use std::str::FromStr;

use mbfdtd_core::ScenarioSpec;
use rayon::prelude::*;

use crate::config::ConfigError;
use crate::run::{run_scenario, write_failure_dump, RunOptions, RunResult};

pub const SUMMARY_FILE: &str = "summary.csv";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    MirrorThickness,
    SourceAmplitude,
    DephasingTimeSolvent,
    DephasingTimeSolute,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::MirrorThickness => "mirror_thickness",
            SweepAxis::SourceAmplitude => "source_amplitude",
            SweepAxis::DephasingTimeSolvent => "dephasing_time_solvent",
            SweepAxis::DephasingTimeSolute => "dephasing_time_solute",
        }
    }

    pub fn si_unit(self) -> &'static str {
        match self {
            SweepAxis::MirrorThickness => "m",
            SweepAxis::SourceAmplitude => "V/m",
            SweepAxis::DephasingTimeSolvent | SweepAxis::DephasingTimeSolute => "s",
        }
    }

    /// Unit suffixes with the number of units per SI unit.
    fn units(self) -> &'static [(&'static str, f64)] {
        match self {
            SweepAxis::MirrorThickness => &[("nm", 1e9), ("um", 1e6), ("m", 1.0)],
            SweepAxis::SourceAmplitude => &[("V/m", 1.0), ("v_per_m", 1.0)],
            SweepAxis::DephasingTimeSolvent | SweepAxis::DephasingTimeSolute => {
                &[("fs", 1e15), ("ps", 1e12), ("s", 1.0)]
            }
        }
    }

    /// Copy of `base` with this axis set to `value` (SI).
    pub fn apply(self, base: &ScenarioSpec, value: f64) -> ScenarioSpec {
        let mut s = base.clone();
        match self {
            SweepAxis::MirrorThickness => s.mirror_thickness = value,
            SweepAxis::SourceAmplitude => s.source.amplitude = value,
            SweepAxis::DephasingTimeSolvent => s.solvent.dephasing_time = Some(value),
            SweepAxis::DephasingTimeSolute => s.solute.dephasing_time = Some(value),
        }
        s
    }

    /// Parse `0,10,20nm`: comma-separated numbers with one trailing unit
    /// applying to all of them. A bare list is taken as SI.
    pub fn parse_values(self, text: &str) -> Result<Vec<f64>, ConfigError> {
        let text = text.trim();
        let (numbers, factor) = self
            .units()
            .iter()
            .find(|(u, _)| text.ends_with(u) && !text[..text.len() - u.len()].ends_with(['e', 'E']))
            .map(|(u, f)| (&text[..text.len() - u.len()], *f))
            .unwrap_or((text, 1.0));
        numbers
            .split(',')
            .map(|t| {
                t.trim().parse::<f64>().map(|v| v / factor).map_err(|_| ConfigError::BadValue {
                    key: "--values".into(),
                    reason: format!("`{}` is not a number", t.trim()),
                })
            })
            .collect()
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepAxis {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        [
            SweepAxis::MirrorThickness,
            SweepAxis::SourceAmplitude,
            SweepAxis::DephasingTimeSolvent,
            SweepAxis::DephasingTimeSolute,
        ]
        .into_iter()
        .find(|a| a.name() == s)
        .ok_or_else(|| ConfigError::BadValue { key: "--axis".into(), reason: format!("unknown axis `{s}`") })
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub base: ScenarioSpec,
    pub axis: SweepAxis,
    /// SI values, strictly increasing.
    pub values: Vec<f64>,
    /// Concurrent runs; 0 means one per available core.
    pub max_parallel: usize,
}

impl SweepSpec {
    pub fn new(base: ScenarioSpec, axis: SweepAxis, values: Vec<f64>, max_parallel: usize) -> Result<Self, ConfigError> {
        if values.is_empty() {
            return Err(ConfigError::BadValue { key: "--values".into(), reason: "empty value list".into() });
        }
        if !values.windows(2).all(|w| w[1] > w[0]) {
            return Err(ConfigError::BadValue { key: "--values".into(), reason: "values must be strictly increasing".into() });
        }
        for &v in &values {
            axis.apply(&base, v).validate()?;
        }
        Ok(SweepSpec { base, axis, values, max_parallel })
    }

    /// Directory name of the run at `value`.
    pub fn run_label(&self, value: f64) -> String {
        format!("{}={value:e}", self.axis)
    }
}

#[derive(Debug)]
pub struct SweepRow {
    pub value: f64,
    pub outcome: Result<RunResult, crate::run::RunError>,
}

#[derive(Debug)]
pub struct SweepOutcome {
    pub spec: SweepSpec,
    /// In value order regardless of completion order.
    pub rows: Vec<SweepRow>,
}

impl SweepOutcome {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.outcome.is_err()).count()
    }

    /// `axis=…,units=…` line, a column line, then one row per value. Failed
    /// runs keep their row with an empty metric set.
    pub fn summary_csv(&self) -> String {
        let columns: BTreeSet<&str> = self
            .rows
            .iter()
            .filter_map(|r| r.outcome.as_ref().ok())
            .flat_map(|r| r.metrics.keys().map(String::as_str))
            .collect();
        let mut out = format!("axis={},units={}\n", self.spec.axis, self.spec.axis.si_unit());
        out.push_str("value,status");
        for c in &columns {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(&format!("{:e}", row.value));
            match &row.outcome {
                Ok(r) => {
                    out.push_str(",ok");
                    for c in &columns {
                        out.push(',');
                        if let Some(v) = r.metrics.get(*c) {
                            out.push_str(&format!("{v:e}"));
                        }
                    }
                }
                Err(e) => {
                    let msg = e.to_string().replace([',', '\n', '\r'], ";");
                    out.push_str(&format!(",failed: {msg}"));
                    out.push_str(&",".repeat(columns.len()));
                }
            }
            out.push('\n');
        }
        out
    }

    /// One directory per run plus the summary table.
    pub fn write(&self, dir: &Path) -> io::Result<()> {
        std::fs::create_dir_all(dir)?;
        for row in &self.rows {
            let run_dir = dir.join(self.spec.run_label(row.value));
            match &row.outcome {
                Ok(r) => {
                    r.write(&run_dir)?;
                }
                Err(e) => {
                    write_failure_dump(&run_dir, e)?;
                }
            }
        }
        std::fs::write(dir.join(SUMMARY_FILE), self.summary_csv())
    }
}

/// Run every value. A failed run marks its row and never stops the others.
pub fn sweep(sw: SweepSpec, opts: &RunOptions) -> Result<SweepOutcome, rayon::ThreadPoolBuildError> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(sw.max_parallel).build()?;
    let rows = pool.install(|| {
        sw.values
            .par_iter()
            .map(|&value| SweepRow { value, outcome: run_scenario(&sw.axis.apply(&sw.base, value), opts) })
            .collect()
    });
    Ok(SweepOutcome { spec: sw, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use mbfdtd_core::ScenarioTag;

    #[test]
    fn value_lists_with_units() {
        let v = SweepAxis::MirrorThickness.parse_values("0,10,20nm").unwrap();
        assert_eq!(v, vec![0.0, 1e-8, 2e-8]);
        let v = SweepAxis::SourceAmplitude.parse_values("1e8,2e8").unwrap();
        assert_eq!(v, vec![1e8, 2e8]);
        let v = SweepAxis::DephasingTimeSolute.parse_values("1,10ps").unwrap();
        assert_eq!(v, vec![1e-12, 10e-12]);
        assert!(SweepAxis::MirrorThickness.parse_values("1,x nm").is_err());
    }

    #[test]
    fn values_must_increase() {
        let base = ScenarioSpec::new(ScenarioTag::D, 1e6, 1e-15);
        assert!(SweepSpec::new(base.clone(), SweepAxis::MirrorThickness, vec![], 1).is_err());
        assert!(SweepSpec::new(base.clone(), SweepAxis::MirrorThickness, vec![2e-8, 1e-8], 1).is_err());
        assert!(SweepSpec::new(base, SweepAxis::MirrorThickness, vec![1e-8, 2e-8], 1).is_ok());
    }

    #[test]
    fn axis_names_round_trip() {
        for a in ["mirror_thickness", "source_amplitude", "dephasing_time_solvent", "dephasing_time_solute"] {
            assert_eq!(a.parse::<SweepAxis>().unwrap().name(), a);
        }
        assert!("gap".parse::<SweepAxis>().is_err());
    }
}
