//! Configuration files, single runs, sweeps, spectra and output formats for
//! the [`mbfdtd_core`] engine. The `mbfdtd` binary is a thin layer over
//! [`cli`].

pub mod cli;
pub mod config;
pub mod oracles;
pub mod output;
pub mod run;
pub mod spectrum;
pub mod sweep;

pub use config::{parse_config, ConfigError};
pub use run::{run_scenario, RunError, RunOptions, RunResult};
pub use spectrum::{spectrum, Spectrum, Window};
pub use sweep::{sweep, SweepAxis, SweepOutcome, SweepSpec};
