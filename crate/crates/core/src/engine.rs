//! Leapfrog orchestration of one time step.
//!
//! Order within a step (field at n, currents at n−1/2 on entry):
//!
//! 1. `By` from n−1/2 to n+1/2.
//! 2. Soft sources add `s(t_n)` into `Ex`, which the E update then carries
//!    to n+1.
//! 3. Drude currents advance to n+1/2 from `Ex` at n.
//! 4. Each molecular cell predicts its `Ex` at n+1 from the new `By` and its
//!    previous current, propagates `ρ` from n to n+1 with field samples
//!    `E^n`, `(E^n + E*)/2`, `E*`, applies dephasing, and contributes
//!    `J^{n+1/2} = (J(ρ^n) + J(ρ^{n+1}))/2`.
//! 5. `Ex` from n to n+1 with the summed current.
//! 6. Hard sources overwrite their cell with `s(t_{n+1})`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fdtd::{build_pml_profile, FieldState, PmlProfile, SourceSpec};
use crate::media::{update_drude_current, DrudeMedium, DrudeState};
use crate::qlayers::{LevelStructure, QuantumLayer};
use crate::scenario::{assemble_layout, ScenarioSpec, SimulationDomain, SourceKind};

#[derive(Debug, Clone)]
pub struct Mirror {
    pub medium: DrudeMedium,
    pub state: DrudeState,
}

/// Per-layer bookkeeping for the predictor and the trapezoidal current.
#[derive(Debug, Clone, Default)]
struct LayerBuffers {
    /// `J(ρ^n)` for the current ρ.
    j_now: Vec<f64>,
    /// `J^{n−1/2}`, the last current handed to the E update.
    j_half: Vec<f64>,
    begin: Vec<f64>,
    mid: Vec<f64>,
    end: Vec<f64>,
    j_next: Vec<f64>,
}

impl LayerBuffers {
    fn new(n: usize) -> Self {
        LayerBuffers {
            j_now: vec![0.0; n],
            j_half: vec![0.0; n],
            begin: vec![0.0; n],
            mid: vec![0.0; n],
            end: vec![0.0; n],
            j_next: vec![0.0; n],
        }
    }
}

#[derive(Debug, Clone)]
pub struct Simulation {
    fields: FieldState,
    mirrors: Vec<Mirror>,
    solute: Option<(QuantumLayer<3>, LayerBuffers)>,
    solvent: Option<(QuantumLayer<2>, LayerBuffers)>,
    sources: Vec<SourceSpec>,
    current: Vec<f64>,
    domain: Option<SimulationDomain>,
}

impl Simulation {
    /// Empty vacuum grid.
    pub fn new(cells: usize, dx: f64, dt: f64, pml: &PmlProfile) -> Result<Self> {
        Ok(Simulation {
            fields: FieldState::new(cells, dx, dt, pml)?,
            mirrors: Vec::new(),
            solute: None,
            solvent: None,
            sources: Vec::new(),
            current: vec![0.0; cells],
            domain: None,
        })
    }

    /// Fully populated simulation for a validated spec: gold slabs, the
    /// molecular layers of its scenario, and a CW source at the source cell.
    pub fn from_spec(spec: &ScenarioSpec) -> Result<Self> {
        let domain = assemble_layout(spec)?;
        let dx = spec.grid_resolution;
        let profile = build_pml_profile(spec.pml.cells, spec.pml.exponent, spec.pml.target_reflection, dx)?;
        let mut sim = Simulation::new(domain.cell_count, dx, spec.timestep, &profile)?;

        for range in &domain.mirrors {
            let medium = DrudeMedium::new(spec.drude.plasma_frequency, spec.drude.damping_rate, range.clone())?
                .with_eps_inf(spec.drude.eps_inf);
            sim.add_drude(medium)?;
        }

        let s = &spec.solute;
        let levels = LevelStructure::ladder([0.0, s.e1, s.e2], &[s.dipole_01, s.dipole_12])?;
        sim.set_solute(QuantumLayer::new(levels, s.density, s.dephasing_time, domain.solute.clone().collect())?)?;

        if spec.scenario.has_solvent() {
            let v = &spec.solvent;
            let levels = LevelStructure::ladder([0.0, v.e1], &[v.dipole_01])?;
            sim.set_solvent(QuantumLayer::new(levels, v.density, v.dephasing_time, domain.solvent_cells())?)?;
        }

        let src = &spec.source;
        let source = SourceSpec::continuous(domain.source_cell, src.effective_amplitude(), src.angular_frequency, src.ramp_time)?
            .with_kind(src.kind);
        sim.add_source(source)?;
        sim.domain = Some(domain);
        Ok(sim)
    }

    fn check_cells(&self, cells: impl IntoIterator<Item = usize>) -> Result<()> {
        let n = self.fields.cell_count();
        for c in cells {
            if c >= n {
                return Err(Error::invalid("cells", alloc::format!("cell {c} outside a {n}-cell grid")));
            }
        }
        Ok(())
    }

    /// Add a Drude slab; its `ε∞` becomes the background permittivity of
    /// its cells.
    pub fn add_drude(&mut self, medium: DrudeMedium) -> Result<()> {
        if medium.cells.end > self.fields.cell_count() {
            return Err(Error::invalid("cells", "Drude range exceeds the grid"));
        }
        let state = DrudeState::new(&medium);
        self.mirrors.push(Mirror { medium, state });
        let mut eps = vec![1.0; self.fields.cell_count()];
        for m in &self.mirrors {
            eps[m.medium.cells.clone()].iter_mut().for_each(|e| *e = m.medium.eps_inf);
        }
        self.fields.set_background_permittivity(&eps)
    }

    pub fn set_solute(&mut self, layer: QuantumLayer<3>) -> Result<()> {
        self.check_cells(layer.cells.iter().copied())?;
        let buffers = LayerBuffers::new(layer.len());
        self.solute = Some((layer, buffers));
        self.refresh_layer_currents()
    }

    pub fn set_solvent(&mut self, layer: QuantumLayer<2>) -> Result<()> {
        self.check_cells(layer.cells.iter().copied())?;
        let buffers = LayerBuffers::new(layer.len());
        self.solvent = Some((layer, buffers));
        self.refresh_layer_currents()
    }

    pub fn add_source(&mut self, source: SourceSpec) -> Result<()> {
        self.check_cells([source.cell])?;
        self.sources.push(source);
        Ok(())
    }

    /// Replace all sources.
    pub fn set_sources(&mut self, sources: Vec<SourceSpec>) -> Result<()> {
        self.check_cells(sources.iter().map(|s| s.cell))?;
        self.sources = sources;
        Ok(())
    }

    /// Recompute `J(ρ)` after the density matrices were edited directly.
    pub fn refresh_layer_currents(&mut self) -> Result<()> {
        let ex = &self.fields.ex;
        if let Some((layer, buf)) = &mut self.solute {
            gather(ex, &layer.cells, &mut buf.begin);
            layer.polarization_current(&buf.begin, &mut buf.j_now)?;
        }
        if let Some((layer, buf)) = &mut self.solvent {
            gather(ex, &layer.cells, &mut buf.begin);
            layer.polarization_current(&buf.begin, &mut buf.j_now)?;
        }
        Ok(())
    }

    pub fn fields(&self) -> &FieldState {
        &self.fields
    }

    pub fn fields_mut(&mut self) -> &mut FieldState {
        &mut self.fields
    }

    pub fn mirrors(&self) -> &[Mirror] {
        &self.mirrors
    }

    pub fn solute(&self) -> Option<&QuantumLayer<3>> {
        self.solute.as_ref().map(|(l, _)| l)
    }

    pub fn solute_mut(&mut self) -> Option<&mut QuantumLayer<3>> {
        self.solute.as_mut().map(|(l, _)| l)
    }

    pub fn solvent(&self) -> Option<&QuantumLayer<2>> {
        self.solvent.as_ref().map(|(l, _)| l)
    }

    pub fn solvent_mut(&mut self) -> Option<&mut QuantumLayer<2>> {
        self.solvent.as_mut().map(|(l, _)| l)
    }

    pub fn sources(&self) -> &[SourceSpec] {
        &self.sources
    }

    pub fn domain(&self) -> Option<&SimulationDomain> {
        self.domain.as_ref()
    }

    /// Total current handed to the last E update (n−1/2), A/m².
    pub fn current(&self) -> &[f64] {
        &self.current
    }

    pub fn time_index(&self) -> u64 {
        self.fields.time_index
    }

    pub fn time(&self) -> f64 {
        self.fields.time()
    }

    pub fn dt(&self) -> f64 {
        self.fields.dt
    }

    /// Advance every field and layer by one `dt`.
    pub fn step(&mut self) -> Result<()> {
        let dt = self.fields.dt;
        let t = self.fields.time();
        self.fields.update_b();

        for s in &self.sources {
            if s.kind == SourceKind::Soft {
                self.fields.inject_source(s, t);
            }
        }

        for m in &mut self.mirrors {
            update_drude_current(&mut m.state, &m.medium, &self.fields.ex, dt);
            self.current[m.medium.cells.clone()].copy_from_slice(&m.state.current);
        }

        if let Some((layer, buf)) = &mut self.solute {
            advance_layer(layer, buf, &self.fields, &mut self.current, dt)?;
        }
        if let Some((layer, buf)) = &mut self.solvent {
            advance_layer(layer, buf, &self.fields, &mut self.current, dt)?;
        }

        self.fields.update_e(&self.current)?;

        let t_next = t + dt;
        for s in &self.sources {
            if s.kind == SourceKind::Hard {
                self.fields.inject_source(s, t_next);
            }
        }
        self.fields.time_index += 1;
        Ok(())
    }

    /// Run `steps` steps, checking for non-finite fields every `check_every`
    /// steps (and after the last).
    pub fn run(&mut self, steps: u64, check_every: u64) -> Result<()> {
        let check_every = check_every.max(1);
        for k in 1..=steps {
            self.step()?;
            if (k % check_every == 0 || k == steps) && !self.fields.all_finite() {
                return Err(Error::NonFiniteField { step: self.fields.time_index });
            }
        }
        Ok(())
    }
}

fn gather(ex: &[f64], cells: &[usize], out: &mut [f64]) {
    for (o, &c) in out.iter_mut().zip(cells) {
        *o = ex[c];
    }
}

fn advance_layer<const N: usize>(
    layer: &mut QuantumLayer<N>,
    buf: &mut LayerBuffers,
    fields: &FieldState,
    current: &mut [f64],
    dt: f64,
) -> Result<()> {
    for (k, &c) in layer.cells.iter().enumerate() {
        let e_now = fields.ex[c];
        let e_pred = fields.predict_e(c, buf.j_half[k]);
        buf.begin[k] = e_now;
        buf.mid[k] = 0.5 * (e_now + e_pred);
        buf.end[k] = e_pred;
    }
    layer.propagate(&buf.begin, &buf.mid, &buf.end, dt)?;
    layer.apply_dephasing(dt);
    layer.polarization_current(&buf.end, &mut buf.j_next)?;
    for (k, &c) in layer.cells.iter().enumerate() {
        let j = 0.5 * (buf.j_now[k] + buf.j_next[k]);
        buf.j_half[k] = j;
        current[c] = j;
    }
    core::mem::swap(&mut buf.j_now, &mut buf.j_next);
    Ok(())
}
