//! TOML run configuration with unit-suffixed keys.
//!
//! Every dimensional key carries its unit in the name (`mirror_gap_nm`,
//! `total_time_ps`, `e1_ev`). Each quantity accepts a small set of units;
//! giving the same quantity twice in different units is an error, as is any
//! key the parser does not know. SI spellings (`_m`, `_s`, `_j`) are always
//! accepted, and [`to_toml`] writes them so that a spec survives a
//! serialize/parse round trip bit for bit.
//!
//! ```toml
//! scenario = "D"
//! total_time_ps = 2.0
//! source_amplitude_v_per_m = 1e8
//! grid_resolution_nm = 0.5
//!
//! [solute]
//! dephasing_time_ps = 1.0
//! ```

use std::collections::BTreeSet;
use std::fmt::Write as _;

use mbfdtd_core::constants::{angular_frequency_to_ev, ev_to_angular_frequency, DEBYE_TO_CM, EV_TO_J};
use mbfdtd_core::scenario::{SourceKind, DEFAULT_DECIMATION, DEFAULT_RAMP_CYCLES};
use mbfdtd_core::{ScenarioSpec, ScenarioTag};
use toml::{Table, Value};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot parse config: {0}")]
    Syntax(#[from] toml::de::Error),
    #[error("missing required key `{0}`")]
    Missing(String),
    #[error("unknown key `{0}`")]
    Unknown(String),
    #[error("`{0}` is given more than once (in different units)")]
    Duplicate(String),
    #[error("key `{key}`: {reason}")]
    BadValue { key: String, reason: String },
    #[error(transparent)]
    Invalid(#[from] mbfdtd_core::Error),
}

type Result<T> = std::result::Result<T, ConfigError>;

// Negative entries are exact divisors, so `50 nm` becomes the double
// nearest to 5e-8 rather than `50.0 * 1e-9`.
const LENGTH: &[(&str, f64)] = &[("m", 1.0), ("um", -1e6), ("nm", -1e9)];
const TIME: &[(&str, f64)] = &[("s", 1.0), ("ps", -1e12), ("fs", -1e15), ("as", -1e18)];
const ENERGY: &[(&str, f64)] = &[("j", 1.0), ("ev", EV_TO_J)];
const DIPOLE: &[(&str, f64)] = &[("cm", 1.0), ("debye", DEBYE_TO_CM)];
const FIELD: &[(&str, f64)] = &[("v_per_m", 1.0)];
const DENSITY: &[(&str, f64)] = &[("per_m3", 1.0)];
const RATE: &[(&str, f64)] = &[("rad_per_s", 1.0)];

/// One table of the document with bookkeeping of which keys were read.
struct Section<'a> {
    prefix: &'static str,
    table: Option<&'a Table>,
    used: BTreeSet<String>,
}

impl<'a> Section<'a> {
    fn new(prefix: &'static str, table: Option<&'a Table>) -> Self {
        Section { prefix, table, used: BTreeSet::new() }
    }

    fn path(&self, key: &str) -> String {
        if self.prefix.is_empty() {
            key.to_string()
        } else {
            format!("{}.{key}", self.prefix)
        }
    }

    fn raw(&mut self, key: &str) -> Option<&'a Value> {
        let v = self.table?.get(key)?;
        self.used.insert(key.to_string());
        Some(v)
    }

    fn number(&mut self, key: &str) -> Result<Option<f64>> {
        match self.raw(key) {
            None => Ok(None),
            Some(Value::Float(f)) => Ok(Some(*f)),
            Some(Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(_) => Err(self.bad(key, "expected a number")),
        }
    }

    fn bad(&self, key: &str, reason: impl Into<String>) -> ConfigError {
        ConfigError::BadValue { key: self.path(key), reason: reason.into() }
    }

    /// SI value of `base` given in any of `units`.
    fn quantity(&mut self, base: &str, units: &[(&str, f64)]) -> Result<Option<f64>> {
        let mut found = None;
        for (suffix, factor) in units {
            let key = format!("{base}_{suffix}");
            if let Some(v) = self.number(&key)? {
                if found.is_some() {
                    return Err(ConfigError::Duplicate(self.path(base)));
                }
                found = Some(if *factor < 0.0 { v / -factor } else { v * factor });
            }
        }
        Ok(found)
    }

    fn required(&mut self, base: &str, units: &[(&str, f64)]) -> Result<f64> {
        self.quantity(base, units)?
            .ok_or_else(|| ConfigError::Missing(format!("{}_{{{}}}", self.path(base), unit_list(units))))
    }

    fn string(&mut self, key: &str) -> Result<Option<String>> {
        match self.raw(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(_) => Err(self.bad(key, "expected a string")),
        }
    }

    fn count(&mut self, key: &str) -> Result<Option<usize>> {
        match self.raw(key) {
            None => Ok(None),
            Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as usize)),
            Some(_) => Err(self.bad(key, "expected a non-negative integer")),
        }
    }

    fn finish(&self, nested: &[&str]) -> Result<()> {
        let Some(table) = self.table else { return Ok(()) };
        for key in table.keys() {
            if !self.used.contains(key) && !nested.contains(&key.as_str()) {
                return Err(ConfigError::Unknown(self.path(key)));
            }
        }
        Ok(())
    }
}

fn unit_list(units: &[(&str, f64)]) -> String {
    units.iter().map(|u| u.0).collect::<Vec<_>>().join(",")
}

fn subtable<'a>(root: &'a Table, name: &str) -> Result<Option<&'a Table>> {
    match root.get(name) {
        None => Ok(None),
        Some(Value::Table(t)) => Ok(Some(t)),
        Some(_) => Err(ConfigError::BadValue { key: name.to_string(), reason: "expected a table".into() }),
    }
}

/// Parse a config document into a validated spec.
pub fn parse_config(text: &str) -> Result<ScenarioSpec> {
    let root: Table = text.parse()?;
    let mut top = Section::new("", Some(&root));

    let tag: ScenarioTag = top
        .string("scenario")?
        .ok_or_else(|| ConfigError::Missing("scenario".into()))?
        .parse()?;
    let total_time = top.required("total_time", TIME)?;
    let amplitude = top.required("source_amplitude", FIELD)?;
    let mut spec = ScenarioSpec::new(tag, amplitude, total_time);

    if let Some(dx) = top.quantity("grid_resolution", LENGTH)? {
        spec = spec.with_resolution(dx);
    }
    if let Some(dt) = top.quantity("timestep", TIME)? {
        spec.timestep = dt;
    }
    if let Some(v) = top.quantity("mirror_thickness", LENGTH)? {
        spec.mirror_thickness = v;
    }
    if let Some(v) = top.quantity("mirror_gap", LENGTH)? {
        spec.mirror_gap = v;
    }
    if let Some(v) = top.quantity("solute_thickness", LENGTH)? {
        spec.solute_thickness = v;
    }
    if let Some(v) = top.quantity("solvent_thickness", LENGTH)? {
        spec.solvent_thickness = v;
    }
    if let Some(v) = top.quantity("vacuum_margin", LENGTH)? {
        spec.vacuum_margin = v;
    }
    if let Some(v) = top.number("amplitude_scale")? {
        spec.source.amplitude_scale = v;
    }
    let energy = top.quantity("source_energy", &ENERGY[1..])?;
    let rate = top.quantity("source_angular_frequency", RATE)?;
    match (energy, rate) {
        (Some(_), Some(_)) => return Err(ConfigError::Duplicate("source_energy / source_angular_frequency".into())),
        (Some(e), None) => spec.source.angular_frequency = ev_to_angular_frequency(e / EV_TO_J),
        (None, Some(w)) => spec.source.angular_frequency = w,
        (None, None) => {}
    }
    let omega = spec.source.angular_frequency;
    spec.source.ramp_time = match (top.quantity("source_ramp", TIME)?, top.number("source_ramp_cycles")?) {
        (Some(_), Some(_)) => return Err(ConfigError::Duplicate("source_ramp".into())),
        (Some(t), None) => t,
        (None, Some(c)) => c * 2.0 * std::f64::consts::PI / omega,
        (None, None) => DEFAULT_RAMP_CYCLES * 2.0 * std::f64::consts::PI / omega,
    };
    if let Some(kind) = top.string("source_kind")? {
        spec.source.kind = match kind.as_str() {
            "soft" => SourceKind::Soft,
            "hard" => SourceKind::Hard,
            _ => return Err(top.bad("source_kind", "expected \"soft\" or \"hard\"")),
        };
    }
    spec.decimation = top.count("decimation")?.unwrap_or(DEFAULT_DECIMATION);

    let solute_table = subtable(&root, "solute")?;
    let mut solute = Section::new("solute", solute_table);
    if let Some(v) = solute.quantity("e1", ENERGY)? {
        spec.solute.e1 = v;
    }
    if let Some(v) = solute.quantity("e2", ENERGY)? {
        spec.solute.e2 = v;
    }
    if let Some(v) = solute.quantity("dipole_01", DIPOLE)? {
        spec.solute.dipole_01 = v;
    }
    if let Some(v) = solute.quantity("dipole_12", DIPOLE)? {
        spec.solute.dipole_12 = v;
    }
    if let Some(v) = solute.quantity("density", DENSITY)? {
        spec.solute.density = v;
    }
    spec.solute.dephasing_time = solute.quantity("dephasing_time", TIME)?;
    solute.finish(&[])?;

    let solvent_table = subtable(&root, "solvent")?;
    let mut solvent = Section::new("solvent", solvent_table);
    if let Some(v) = solvent.quantity("e1", ENERGY)? {
        spec.solvent.e1 = v;
    }
    if let Some(v) = solvent.quantity("dipole_01", DIPOLE)? {
        spec.solvent.dipole_01 = v;
    }
    if let Some(v) = solvent.quantity("density", DENSITY)? {
        spec.solvent.density = v;
    }
    spec.solvent.dephasing_time = solvent.quantity("dephasing_time", TIME)?;
    solvent.finish(&[])?;

    let mut pml = Section::new("pml", subtable(&root, "pml")?);
    if let Some(v) = pml.count("cells")? {
        spec.pml.cells = v;
    }
    if let Some(v) = pml.number("exponent")? {
        spec.pml.exponent = v;
    }
    if let Some(v) = pml.number("target_reflection")? {
        spec.pml.target_reflection = v;
    }
    pml.finish(&[])?;

    let mut drude = Section::new("drude", subtable(&root, "drude")?);
    let plasma = drude.quantity("plasma_energy", &ENERGY[1..])?;
    let plasma_rate = drude.quantity("plasma_frequency", RATE)?;
    spec.drude.plasma_frequency = pick(plasma, plasma_rate, "drude.plasma")?.unwrap_or(spec.drude.plasma_frequency);
    let damping = drude.quantity("damping_energy", &ENERGY[1..])?;
    let damping_rate = drude.quantity("damping_rate", RATE)?;
    spec.drude.damping_rate = pick(damping, damping_rate, "drude.damping")?.unwrap_or(spec.drude.damping_rate);
    if let Some(v) = drude.number("eps_inf")? {
        spec.drude.eps_inf = v;
    }
    drude.finish(&[])?;

    top.finish(&["solute", "solvent", "pml", "drude"])?;
    spec.validate()?;
    Ok(spec)
}

/// Either an energy in joules (converted to rad/s) or a rate in rad/s.
fn pick(energy_j: Option<f64>, rate: Option<f64>, what: &str) -> Result<Option<f64>> {
    match (energy_j, rate) {
        (Some(_), Some(_)) => Err(ConfigError::Duplicate(what.into())),
        (Some(e), None) => Ok(Some(ev_to_angular_frequency(e / EV_TO_J))),
        (None, r) => Ok(r),
    }
}

/// Shortest decimal that parses back to the same `f64`, always with a
/// decimal point or exponent so TOML reads it as a float.
fn float(v: f64) -> String {
    let s = format!("{v:?}");
    if s.contains(['.', 'e', 'E']) || s.contains("inf") || s.contains("NaN") {
        s
    } else {
        format!("{s}.0")
    }
}

/// Config document in SI spellings; `parse_config(&to_toml(s)) == s`.
pub fn to_toml(spec: &ScenarioSpec) -> String {
    let mut out = String::new();
    let mut line = |k: &str, v: String| {
        let _ = writeln!(out, "{k} = {v}");
    };
    line("scenario", format!("\"{}\"", spec.scenario));
    line("grid_resolution_m", float(spec.grid_resolution));
    line("timestep_s", float(spec.timestep));
    line("total_time_s", float(spec.total_time));
    line("mirror_thickness_m", float(spec.mirror_thickness));
    line("mirror_gap_m", float(spec.mirror_gap));
    line("solute_thickness_m", float(spec.solute_thickness));
    line("solvent_thickness_m", float(spec.solvent_thickness));
    line("vacuum_margin_m", float(spec.vacuum_margin));
    line("source_amplitude_v_per_m", float(spec.source.amplitude));
    line("amplitude_scale", float(spec.source.amplitude_scale));
    line("source_angular_frequency_rad_per_s", float(spec.source.angular_frequency));
    line("source_ramp_s", float(spec.source.ramp_time));
    let kind = match spec.source.kind {
        SourceKind::Soft => "soft",
        SourceKind::Hard => "hard",
    };
    line("source_kind", format!("\"{kind}\""));
    line("decimation", spec.decimation.to_string());
    let _ = writeln!(out, "\n[solute]");
    let _ = writeln!(out, "e1_j = {}", float(spec.solute.e1));
    let _ = writeln!(out, "e2_j = {}", float(spec.solute.e2));
    let _ = writeln!(out, "dipole_01_cm = {}", float(spec.solute.dipole_01));
    let _ = writeln!(out, "dipole_12_cm = {}", float(spec.solute.dipole_12));
    let _ = writeln!(out, "density_per_m3 = {}", float(spec.solute.density));
    if let Some(t) = spec.solute.dephasing_time {
        let _ = writeln!(out, "dephasing_time_s = {}", float(t));
    }
    let _ = writeln!(out, "\n[solvent]");
    let _ = writeln!(out, "e1_j = {}", float(spec.solvent.e1));
    let _ = writeln!(out, "dipole_01_cm = {}", float(spec.solvent.dipole_01));
    let _ = writeln!(out, "density_per_m3 = {}", float(spec.solvent.density));
    if let Some(t) = spec.solvent.dephasing_time {
        let _ = writeln!(out, "dephasing_time_s = {}", float(t));
    }
    let _ = writeln!(out, "\n[pml]");
    let _ = writeln!(out, "cells = {}", spec.pml.cells);
    let _ = writeln!(out, "exponent = {}", float(spec.pml.exponent));
    let _ = writeln!(out, "target_reflection = {}", float(spec.pml.target_reflection));
    let _ = writeln!(out, "\n[drude]");
    let _ = writeln!(out, "plasma_frequency_rad_per_s = {}", float(spec.drude.plasma_frequency));
    let _ = writeln!(out, "damping_rate_rad_per_s = {}", float(spec.drude.damping_rate));
    let _ = writeln!(out, "eps_inf = {}", float(spec.drude.eps_inf));
    out
}

/// Canonical JSON echo of a resolved spec.
pub fn to_json(spec: &ScenarioSpec) -> String {
    serde_json::to_string_pretty(spec).expect("spec serializes")
}

/// One-line human summary used by `validate`.
pub fn summary(spec: &ScenarioSpec) -> String {
    format!(
        "scenario {} | dx {} nm, dt {:.4e} s, {} steps | L {} nm, d {} nm | E0 {:e} V/m x{} at {:.3} eV",
        spec.scenario,
        spec.grid_resolution * 1e9,
        spec.timestep,
        spec.step_count(),
        spec.mirror_thickness * 1e9,
        spec.mirror_gap * 1e9,
        spec.source.amplitude,
        spec.source.amplitude_scale,
        angular_frequency_to_ev(spec.source.angular_frequency),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "scenario = \"C\"\ntotal_time_fs = 50\nsource_amplitude_v_per_m = 1e8\n";

    #[test]
    fn defaults_fill_the_reference_table() {
        let s = parse_config(MINIMAL).unwrap();
        assert_eq!(s, ScenarioSpec::new(ScenarioTag::C, 1e8, 50e-15));
    }

    #[test]
    fn missing_scenario_is_reported() {
        let e = parse_config("total_time_fs = 5\nsource_amplitude_v_per_m = 1\n").unwrap_err();
        assert!(matches!(e, ConfigError::Missing(k) if k == "scenario"));
    }

    #[test]
    fn duplicate_units_are_rejected() {
        let e = parse_config(&format!("{MINIMAL}mirror_gap_nm = 354\nmirror_gap_m = 3.54e-7\n")).unwrap_err();
        assert!(matches!(e, ConfigError::Duplicate(_)));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = parse_config(&format!("{MINIMAL}mirror_gap_furlong = 1\n")).unwrap_err();
        assert!(matches!(e, ConfigError::Unknown(k) if k == "mirror_gap_furlong"));
        let e = parse_config(&format!("{MINIMAL}[solute]\ncolour = 1\n")).unwrap_err();
        assert!(matches!(e, ConfigError::Unknown(k) if k == "solute.colour"));
    }

    #[test]
    fn ramp_in_cycles() {
        let s = parse_config(&format!("{MINIMAL}source_ramp_cycles = 0\n")).unwrap();
        assert_eq!(s.source.ramp_time, 0.0);
    }
}
