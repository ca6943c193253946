//! Run description and the spatial layout of the four cavity scenarios.
//!
//! All quantities are SI. Unit conversion from human-friendly config keys
//! (nm, fs, eV, debye) happens once, in the configuration parser.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::constants::{ev_to_angular_frequency, DEBYE_TO_CM, EV_TO_J, SPEED_OF_LIGHT};
use crate::error::{Error, Result};
use crate::math;

/// The four geometries: bare solute (A), solute between solvent slabs (B),
/// and the same two inside a gold Fabry–Perot cavity (C, D).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ScenarioTag {
    A,
    B,
    C,
    D,
}

impl ScenarioTag {
    pub const ALL: [ScenarioTag; 4] = [ScenarioTag::A, ScenarioTag::B, ScenarioTag::C, ScenarioTag::D];

    pub fn has_mirrors(self) -> bool {
        matches!(self, ScenarioTag::C | ScenarioTag::D)
    }

    pub fn has_solvent(self) -> bool {
        matches!(self, ScenarioTag::B | ScenarioTag::D)
    }

    /// Mirror spacing used when the config does not give one: 354 nm for the
    /// solute-only geometries, 340 nm for the solvent (polariton) geometries.
    pub fn default_mirror_gap(self) -> f64 {
        if self.has_solvent() {
            340e-9
        } else {
            354e-9
        }
    }
}

impl fmt::Display for ScenarioTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ScenarioTag::A => "A",
            ScenarioTag::B => "B",
            ScenarioTag::C => "C",
            ScenarioTag::D => "D",
        };
        f.write_str(s)
    }
}

impl FromStr for ScenarioTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "A" | "a" => Ok(ScenarioTag::A),
            "B" | "b" => Ok(ScenarioTag::B),
            "C" | "c" => Ok(ScenarioTag::C),
            "D" | "d" => Ok(ScenarioTag::D),
            other => Err(Error::invalid("scenario", format!("unknown scenario tag `{other}`"))),
        }
    }
}

/// Soft sources add to the field at the source cell; hard sources overwrite it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceKind {
    #[default]
    Soft,
    Hard,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceConfig {
    /// Peak field E0, V/m.
    pub amplitude: f64,
    /// Explicit multiplier on E0 (e.g. the in-cavity enhancement when comparing
    /// bare and cavity runs). Never applied implicitly.
    pub amplitude_scale: f64,
    /// Driving angular frequency ω_in, rad/s.
    pub angular_frequency: f64,
    /// Half-cosine turn-on time, s.
    pub ramp_time: f64,
    pub kind: SourceKind,
}

impl SourceConfig {
    pub fn effective_amplitude(&self) -> f64 {
        self.amplitude * self.amplitude_scale
    }
}

/// Three-level solute ladder |0⟩, |1⟩, |2⟩ with E0 = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SoluteSpec {
    /// E1, J.
    pub e1: f64,
    /// E2, J.
    pub e2: f64,
    /// μ01, C·m.
    pub dipole_01: f64,
    /// μ12, C·m.
    pub dipole_12: f64,
    /// Number density n0, m⁻³.
    pub density: f64,
    /// Pure dephasing time, s.
    pub dephasing_time: Option<f64>,
}

/// Two-level solvent |0'⟩, |1'⟩ with E0' = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolventSpec {
    /// E1', J.
    pub e1: f64,
    /// μ0'1', C·m.
    pub dipole_01: f64,
    /// Number density n0, m⁻³.
    pub density: f64,
    /// Pure dephasing time, s.
    pub dephasing_time: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PmlSpec {
    pub cells: usize,
    pub exponent: f64,
    pub target_reflection: f64,
}

impl Default for PmlSpec {
    fn default() -> Self {
        PmlSpec { cells: 64, exponent: 3.0, target_reflection: 1e-8 }
    }
}

/// Drude parameters for the mirrors, angular frequencies in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DrudeSpec {
    pub plasma_frequency: f64,
    pub damping_rate: f64,
    /// Background permittivity ε∞.
    pub eps_inf: f64,
}

impl Default for DrudeSpec {
    /// Gold: ħω_d = 7.039 eV, ħΓ_d = 0.1809 eV.
    fn default() -> Self {
        DrudeSpec {
            plasma_frequency: ev_to_angular_frequency(7.039),
            damping_rate: ev_to_angular_frequency(0.1809),
            eps_inf: 1.0,
        }
    }
}

/// Fully resolved, SI-unit description of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub scenario: ScenarioTag,
    /// dx, m.
    pub grid_resolution: f64,
    /// dt, s.
    pub timestep: f64,
    /// s.
    pub total_time: f64,
    /// Thickness L of each gold mirror, m. Ignored for A and B.
    pub mirror_thickness: f64,
    /// Inner-surface separation d of the mirrors, m.
    pub mirror_gap: f64,
    pub solute_thickness: f64,
    /// Thickness of each of the two solvent slabs, m.
    pub solvent_thickness: f64,
    /// Vacuum between each PML and the outer mirror surface, m.
    pub vacuum_margin: f64,
    pub source: SourceConfig,
    pub solute: SoluteSpec,
    pub solvent: SolventSpec,
    pub pml: PmlSpec,
    pub drude: DrudeSpec,
    /// Record every `decimation` steps.
    pub decimation: usize,
}

/// Default number density when none is configured, m⁻³.
pub const DEFAULT_DENSITY: f64 = 1e27;
/// Default vacuum margin between PML and the structure, m.
pub const DEFAULT_VACUUM_MARGIN: f64 = 200e-9;
/// Default source ramp, in optical cycles.
pub const DEFAULT_RAMP_CYCLES: f64 = 10.0;
pub const DEFAULT_DECIMATION: usize = 50;

impl ScenarioSpec {
    /// Spec with every defaulted field taken from the reference parameter
    /// table (dx = 0.1 nm, dt = dx/2c0, 50 nm gold, 1 nm solute, 4.5 nm
    /// solvent, 10 D dipoles, ħω_in = 1.5 eV).
    pub fn new(scenario: ScenarioTag, source_amplitude: f64, total_time: f64) -> Self {
        let dx = 0.1e-9;
        let omega = ev_to_angular_frequency(1.5);
        let mu = 10.0 * DEBYE_TO_CM;
        ScenarioSpec {
            scenario,
            grid_resolution: dx,
            timestep: Self::default_timestep(dx),
            total_time,
            mirror_thickness: 50e-9,
            mirror_gap: scenario.default_mirror_gap(),
            solute_thickness: 1e-9,
            solvent_thickness: 4.5e-9,
            vacuum_margin: DEFAULT_VACUUM_MARGIN,
            source: SourceConfig {
                amplitude: source_amplitude,
                amplitude_scale: 1.0,
                angular_frequency: omega,
                ramp_time: DEFAULT_RAMP_CYCLES * 2.0 * core::f64::consts::PI / omega,
                kind: SourceKind::Soft,
            },
            solute: SoluteSpec {
                e1: 2.0 * EV_TO_J,
                e2: 3.0 * EV_TO_J,
                dipole_01: mu,
                dipole_12: mu,
                density: DEFAULT_DENSITY,
                dephasing_time: None,
            },
            solvent: SolventSpec {
                e1: 1.55 * EV_TO_J,
                dipole_01: mu,
                density: DEFAULT_DENSITY,
                dephasing_time: None,
            },
            pml: PmlSpec::default(),
            drude: DrudeSpec::default(),
            decimation: DEFAULT_DECIMATION,
        }
    }

    /// dt = dx/(2 c0).
    pub fn default_timestep(dx: f64) -> f64 {
        dx / (2.0 * SPEED_OF_LIGHT)
    }

    /// Change dx and reset dt to its default.
    pub fn with_resolution(mut self, dx: f64) -> Self {
        self.grid_resolution = dx;
        self.timestep = Self::default_timestep(dx);
        self
    }

    pub fn step_count(&self) -> u64 {
        let n = math::round(self.total_time / self.timestep);
        if n < 0.0 {
            0
        } else {
            n as u64
        }
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(name: &'static str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(name, format!("must be positive and finite, got {v:e}")))
            }
        }
        fn non_negative(name: &'static str, v: f64) -> Result<()> {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(name, format!("must be non-negative and finite, got {v:e}")))
            }
        }
        fn dephasing(name: &'static str, v: Option<f64>) -> Result<()> {
            match v {
                Some(t) => positive(name, t),
                None => Ok(()),
            }
        }

        positive("grid_resolution", self.grid_resolution)?;
        positive("timestep", self.timestep)?;
        let limit = self.grid_resolution / SPEED_OF_LIGHT;
        if self.timestep > limit * (1.0 + 1e-12) {
            return Err(Error::CflViolation { dt: self.timestep, limit });
        }
        positive("total_time", self.total_time)?;
        non_negative("mirror_thickness", self.mirror_thickness)?;
        positive("mirror_gap", self.mirror_gap)?;
        positive("solute_thickness", self.solute_thickness)?;
        positive("solvent_thickness", self.solvent_thickness)?;
        positive("vacuum_margin", self.vacuum_margin)?;

        non_negative("source_amplitude", self.source.amplitude)?;
        non_negative("amplitude_scale", self.source.amplitude_scale)?;
        positive("source_angular_frequency", self.source.angular_frequency)?;
        non_negative("source_ramp", self.source.ramp_time)?;

        positive("solute_e1", self.solute.e1)?;
        if !(self.solute.e2.is_finite() && self.solute.e2 > self.solute.e1) {
            return Err(Error::invalid("solute_e2", "must exceed solute_e1"));
        }
        for (name, v) in [
            ("solute_dipole_01", self.solute.dipole_01),
            ("solute_dipole_12", self.solute.dipole_12),
            ("solvent_dipole", self.solvent.dipole_01),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(name, "must be finite"));
            }
        }
        non_negative("solute_density", self.solute.density)?;
        dephasing("solute_dephasing_time", self.solute.dephasing_time)?;
        positive("solvent_e1", self.solvent.e1)?;
        non_negative("solvent_density", self.solvent.density)?;
        dephasing("solvent_dephasing_time", self.solvent.dephasing_time)?;

        if self.pml.cells != 0 && self.pml.cells < 8 {
            return Err(Error::invalid("pml_cells", "must be 0 (disabled) or at least 8"));
        }
        non_negative("pml_exponent", self.pml.exponent)?;
        let r = self.pml.target_reflection;
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::invalid("pml_target_reflection", "must lie in (0, 1)"));
        }
        positive("drude_plasma_frequency", self.drude.plasma_frequency)?;
        non_negative("drude_damping_rate", self.drude.damping_rate)?;
        positive("drude_eps_inf", self.drude.eps_inf)?;
        if self.decimation == 0 {
            return Err(Error::invalid("decimation", "must be at least 1"));
        }
        Ok(())
    }
}

/// What occupies a grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Pml,
    Vacuum,
    Gold,
    Solvent,
    Solute,
}

/// Non-fatal layout remarks, e.g. a thickness changed by snapping to the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LayoutWarning {
    pub what: &'static str,
    pub requested: f64,
    pub realized: f64,
}

impl fmt::Display for LayoutWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} snapped from {:.4} nm to {:.4} nm",
            self.what,
            self.requested * 1e9,
            self.realized * 1e9
        )
    }
}

/// Cell-level map of the structure.
///
/// `Ex` lives at cell centers, so cell `i` spans `[i dx, (i+1) dx)` and a slab
/// of `k` cells is exactly `k dx` thick.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationDomain {
    pub cell_count: usize,
    pub dx: f64,
    pub regions: Vec<Region>,
    pub pml_cells: usize,
    pub source_cell: usize,
    /// Between the source and the structure; sees incident plus reflected waves.
    pub reflection_probe: usize,
    /// Beyond the structure on the far side; sees only the transmitted wave.
    pub transmission_probe: usize,
    /// Center cell of the solute layer.
    pub solute_probe: usize,
    pub mirrors: Vec<Range<usize>>,
    pub solvent: Vec<Range<usize>>,
    pub solute: Range<usize>,
    /// Cells strictly between the inner mirror surfaces.
    pub gap: Range<usize>,
    pub warnings: Vec<LayoutWarning>,
}

impl SimulationDomain {
    pub fn count(&self, region: Region) -> usize {
        self.regions.iter().filter(|&&r| r == region).count()
    }

    pub fn solvent_cells(&self) -> Vec<usize> {
        self.solvent.iter().flat_map(|r| r.clone()).collect()
    }
}

fn snap(what: &'static str, thickness: f64, dx: f64, warnings: &mut Vec<LayoutWarning>) -> usize {
    let cells = math::round(thickness / dx) as usize;
    note_snap(what, thickness, cells, dx, warnings);
    cells
}

fn note_snap(what: &'static str, requested: f64, cells: usize, dx: f64, warnings: &mut Vec<LayoutWarning>) {
    let realized = cells as f64 * dx;
    if math::abs(realized - requested) > 0.5 * dx * (1.0 + 1e-9) {
        warnings.push(LayoutWarning { what, requested, realized });
    }
}

/// Lay the structure out on the grid, left to right:
///
/// `PML | vacuum (source) | gold | vacuum | solvent | solute | solvent | vacuum | gold | vacuum | PML`
///
/// Gold is present for C/D only (and vanishes when L rounds to zero cells),
/// solvent for B/D only. The two inner vacuum gaps are equal, so the layout
/// is mirror-symmetric about the solute center.
pub fn assemble_layout(spec: &ScenarioSpec) -> Result<SimulationDomain> {
    spec.validate()?;
    let dx = spec.grid_resolution;
    let tag = spec.scenario;
    let mut warnings = Vec::new();

    let pml = spec.pml.cells;
    let margin = snap("vacuum margin", spec.vacuum_margin, dx, &mut warnings);
    let mirror = if tag.has_mirrors() {
        snap("mirror thickness", spec.mirror_thickness, dx, &mut warnings)
    } else {
        0
    };
    let solute = snap("solute thickness", spec.solute_thickness, dx, &mut warnings);
    let solvent = if tag.has_solvent() {
        snap("solvent thickness", spec.solvent_thickness, dx, &mut warnings)
    } else {
        0
    };
    if solute == 0 {
        return Err(Error::GridTooSmall(format!(
            "solute thickness {:e} m rounds to zero cells at dx = {dx:e} m",
            spec.solute_thickness
        )));
    }
    if tag.has_solvent() && solvent == 0 {
        return Err(Error::GridTooSmall(format!(
            "solvent thickness {:e} m rounds to zero cells at dx = {dx:e} m",
            spec.solvent_thickness
        )));
    }
    if margin < 8 {
        return Err(Error::GridTooSmall(format!(
            "vacuum margin holds {margin} cells; at least 8 are needed for source and probes"
        )));
    }
    let layers = solute + 2 * solvent;
    let side = math::round((spec.mirror_gap / dx - layers as f64) / 2.0);
    if side < 1.0 {
        return Err(Error::GridTooSmall(format!(
            "mirror gap {:e} m cannot hold the {layers}-cell molecular stack",
            spec.mirror_gap
        )));
    }
    let side = side as usize;
    let gap = 2 * side + layers;
    note_snap("mirror gap", spec.mirror_gap, gap, dx, &mut warnings);

    let mut regions = Vec::with_capacity(2 * (pml + margin + mirror) + gap);
    let mut push = |region: Region, n: usize| -> Range<usize> {
        let start = regions.len();
        regions.extend(core::iter::repeat_n(region, n));
        start..regions.len()
    };
    push(Region::Pml, pml);
    push(Region::Vacuum, margin);
    let left_mirror = push(Region::Gold, mirror);
    let gap_start = left_mirror.end;
    push(Region::Vacuum, side);
    let left_solvent = push(Region::Solvent, solvent);
    let solute_range = push(Region::Solute, solute);
    let right_solvent = push(Region::Solvent, solvent);
    push(Region::Vacuum, side);
    let gap_range = gap_start..gap_start + gap;
    let right_mirror = push(Region::Gold, mirror);
    push(Region::Vacuum, margin);
    push(Region::Pml, pml);

    let cell_count = regions.len();
    let mirrors = if mirror > 0 { alloc::vec![left_mirror, right_mirror] } else { Vec::new() };
    let solvent_ranges =
        if solvent > 0 { alloc::vec![left_solvent, right_solvent] } else { Vec::new() };

    Ok(SimulationDomain {
        cell_count,
        dx,
        regions,
        pml_cells: pml,
        source_cell: pml + margin / 4,
        reflection_probe: pml + margin / 2,
        transmission_probe: cell_count - 1 - pml - margin / 2,
        solute_probe: solute_range.start + solute / 2,
        mirrors,
        solvent: solvent_ranges,
        solute: solute_range,
        gap: gap_range,
        warnings,
    })
}

/// Convenience for diagnostics: `"PML:64 vacuum:2000 gold:500 ..."`.
pub fn describe_layout(domain: &SimulationDomain) -> String {
    let mut out = String::new();
    let mut iter = domain.regions.iter().peekable();
    while let Some(&region) = iter.next() {
        let mut n = 1;
        while iter.peek() == Some(&&region) {
            iter.next();
            n += 1;
        }
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(&format!("{region:?}:{n}").to_lowercase());
    }
    out
}
