//! One-dimensional Maxwell–Bloch FDTD engine.
//!
//! A classical `Ex`/`By` field on a staggered Yee grid is coupled to Drude
//! metal slabs and to layers of few-level molecules described by per-cell
//! density matrices. The crate is `no_std` and only needs `alloc`; file
//! formats, configuration parsing and the command line live in the `mbfdtd`
//! companion crate.
//!
//! Module map:
//!
//! * [`scenario`] validated run description and spatial layout
//! * [`fdtd`] field arrays, PML and sources
//! * [`media`] Drude free-carrier current
//! * [`qlayers`] density-matrix layers and polarization current
//! * [`engine`] leapfrog orchestration of one time step
//! * [`observables`] recorders and time-series analyses
//! * [`calibration`] pulse transmission, polariton and enhancement runs
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod calibration;
pub mod constants;
pub mod engine;
pub mod error;
pub mod fdtd;
pub(crate) mod math;
pub mod media;
pub mod observables;
pub mod qlayers;
pub mod scenario;

pub use constants::PhysicalConstants;
pub use engine::Simulation;
pub use error::{Error, Result};
pub use scenario::{assemble_layout, ScenarioSpec, ScenarioTag, SimulationDomain};
