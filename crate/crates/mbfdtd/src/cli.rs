//! Command-line verbs and exit codes.
//!
//! Exit codes: 0 success, 1 configuration error, 2 numerical failure,
//! 3 partial sweep failure.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use mbfdtd_core::calibration::{energy_grid, PolaritonCalibration, PolaritonCalibrator, ProbePulse};
use mbfdtd_core::scenario::{assemble_layout, describe_layout};
use mbfdtd_core::ScenarioSpec;
use serde::Serialize;

use crate::config::{self, ConfigError};
use crate::run::{self, RunError, RunOptions};
use crate::sweep::{self, SweepAxis, SweepSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_PARTIAL_SWEEP: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "mbfdtd", version, about = "1D Maxwell-Bloch FDTD simulator for molecular layers in a gold cavity")]
pub struct Cli {
    /// Run the built-in oracle suite before (or instead of) any command.
    #[arg(long)]
    pub seed_check: bool,
    /// Output directory (default: out/<config name>).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Record every k-th step.
    #[arg(long, global = true)]
    pub decimation: Option<usize>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Permit runs of more than 1e9 steps.
    #[arg(long, global = true)]
    pub allow_long: bool,
    /// Log progress.
    #[arg(short, long, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scenario.
    Run { config: PathBuf },
    /// Run the scenario once per value of one parameter.
    Sweep {
        config: PathBuf,
        /// mirror_thickness | source_amplitude | dephasing_time_solvent | dephasing_time_solute
        #[arg(long)]
        axis: String,
        /// Comma-separated values with one trailing unit, e.g. `0,10,20nm`.
        #[arg(long)]
        values: String,
    },
    /// Polariton calibration of a scenario-D config (solute removed).
    Calibrate {
        config: PathBuf,
        /// Tune the solvent density until the lower polariton sits here (eV).
        #[arg(long)]
        target_lp: Option<f64>,
        #[arg(long, default_value_t = 1.3)]
        from_ev: f64,
        #[arg(long, default_value_t = 1.8)]
        to_ev: f64,
        #[arg(long, default_value_t = 0.002)]
        step_ev: f64,
    },
    /// Parse the config and print the resolved spec and layout.
    Validate { config: PathBuf },
}

fn load(path: &Path) -> Result<ScenarioSpec, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::BadValue { key: path.display().to_string(), reason: e.to_string() })?;
    config::parse_config(&text)
}

fn out_dir(cli: &Cli, config: &Path) -> PathBuf {
    cli.out.clone().unwrap_or_else(|| {
        let stem = config.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into());
        Path::new("out").join(stem)
    })
}

fn options(cli: &Cli) -> RunOptions {
    RunOptions { decimation: cli.decimation, allow_long: cli.allow_long }
}

/// Run the parsed command line and return the process exit code.
pub fn execute(cli: &Cli) -> i32 {
    if let Some(n) = cli.threads {
        // only fails if a pool already exists, which is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    if cli.seed_check {
        let mut failed = 0;
        for c in crate::oracles::all() {
            println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            failed += usize::from(!c.passed);
        }
        if failed > 0 {
            eprintln!("{failed} oracle check(s) failed");
            return EXIT_NUMERICAL;
        }
    }
    let Some(command) = &cli.command else {
        if cli.seed_check {
            return EXIT_OK;
        }
        eprintln!("no command given; see --help");
        return EXIT_CONFIG;
    };
    match command {
        Command::Validate { config } => validate(config),
        Command::Run { config } => run_command(cli, config),
        Command::Sweep { config, axis, values } => sweep_command(cli, config, axis, values),
        Command::Calibrate { config, target_lp, from_ev, to_ev, step_ev } => {
            calibrate_command(cli, config, *target_lp, energy_grid(*from_ev, *to_ev, *step_ev))
        }
    }
}

fn validate(path: &Path) -> i32 {
    let spec = match load(path) {
        Ok(s) => s,
        Err(e) => return config_failure(&e),
    };
    let domain = match assemble_layout(&spec) {
        Ok(d) => d,
        Err(e) => return config_failure(&e),
    };
    println!("{}", config::summary(&spec));
    println!("{}", describe_layout(&domain));
    for w in &domain.warnings {
        println!("warning: {} snapped from {:.4} nm to {:.4} nm", w.what, w.requested * 1e9, w.realized * 1e9);
    }
    println!("{}", config::to_json(&spec));
    EXIT_OK
}

fn config_failure(e: &dyn std::fmt::Display) -> i32 {
    eprintln!("config error: {e}");
    EXIT_CONFIG
}

fn run_failure(e: &RunError, dir: &Path) -> i32 {
    eprintln!("error: {e}");
    match run::write_failure_dump(dir, e) {
        Ok(Some(p)) => eprintln!("last {} samples written to {}", run::DUMP_SAMPLES, p.display()),
        Ok(None) => {}
        Err(io) => eprintln!("could not write failure dump: {io}"),
    }
    e.exit_code()
}

fn run_command(cli: &Cli, path: &Path) -> i32 {
    let spec = match load(path) {
        Ok(s) => s,
        Err(e) => return config_failure(&e),
    };
    let dir = out_dir(cli, path);
    match run::run_scenario(&spec, &options(cli)) {
        Ok(result) => match result.write(&dir) {
            Ok(manifest) => {
                println!("{} steps in {:.1} s; manifest {}", result.steps, result.wall_clock_s, manifest.display());
                for (k, v) in &result.metrics {
                    println!("  {k} = {v:e}");
                }
                EXIT_OK
            }
            Err(e) => {
                eprintln!("cannot write outputs: {e}");
                EXIT_NUMERICAL
            }
        },
        Err(e) => run_failure(&e, &dir),
    }
}

fn sweep_command(cli: &Cli, path: &Path, axis: &str, values: &str) -> i32 {
    let built = load(path).and_then(|base| {
        let axis: SweepAxis = axis.parse()?;
        let values = axis.parse_values(values)?;
        SweepSpec::new(base, axis, values, cli.threads.unwrap_or(0))
    });
    let sw = match built {
        Ok(s) => s,
        Err(e) => return config_failure(&e),
    };
    for &v in &sw.values {
        if let Err(e) = run::prepare(&sw.axis.apply(&sw.base, v), &options(cli)) {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    }
    let dir = out_dir(cli, path);
    let outcome = match sweep::sweep(sw, &options(cli)) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("cannot start worker pool: {e}");
            return EXIT_NUMERICAL;
        }
    };
    if let Err(e) = outcome.write(&dir) {
        eprintln!("cannot write outputs: {e}");
        return EXIT_NUMERICAL;
    }
    print!("{}", outcome.summary_csv());
    match outcome.failures() {
        0 => EXIT_OK,
        n => {
            eprintln!("{n} of {} runs failed", outcome.rows.len());
            EXIT_PARTIAL_SWEEP
        }
    }
}

#[derive(Debug, Serialize)]
struct CalibrationReport {
    calibration: PolaritonCalibration,
    midpoint_ev: f64,
    splitting_ev: f64,
    target_lower_ev: Option<f64>,
    spec: ScenarioSpec,
}

fn transmission_csv(energies: &[f64], t: &[f64], step: f64) -> String {
    let mut out = format!("quantity=transmission,units=1,energy_step_ev={step:e}\n");
    for (e, v) in energies.iter().zip(t) {
        out.push_str(&format!("{e:e},{v:e}\n"));
    }
    out
}

fn calibrate_command(cli: &Cli, path: &Path, target: Option<f64>, energies: Vec<f64>) -> i32 {
    let spec = match load(path).map_err(RunError::from).and_then(|s| run::prepare(&s, &options(cli))) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let step = energies.get(1).zip(energies.first()).map_or(0.0, |(b, a)| b - a);
    let result = PolaritonCalibrator::new(&spec, energies, ProbePulse::default()).and_then(|cal| {
        let calibration = match target {
            Some(t) => cal.tune_lower_polariton(spec.solvent.density, t, 0.002, 8)?,
            None => cal.measure(spec.solvent.density)?.0,
        };
        let spectrum = cal.spectrum(calibration.solvent_density)?;
        Ok((cal, calibration, spectrum))
    });
    let (cal, calibration, spectrum) = match result {
        Ok(r) => r,
        Err(e @ mbfdtd_core::Error::InvalidParameter { .. }) => {
            eprintln!("calibration failed: {e}");
            return EXIT_CONFIG;
        }
        Err(e) => {
            eprintln!("calibration failed: {e}");
            return EXIT_NUMERICAL;
        }
    };
    let dir = out_dir(cli, path);
    let report = CalibrationReport {
        calibration,
        midpoint_ev: calibration.midpoint_ev(),
        splitting_ev: calibration.splitting_ev(),
        target_lower_ev: target,
        spec: spec.clone(),
    };
    let written = std::fs::create_dir_all(&dir)
        .and_then(|_| std::fs::write(dir.join("transmission_empty.csv"), transmission_csv(cal.energies(), &cal.cavity_spectrum, step)))
        .and_then(|_| std::fs::write(dir.join("transmission_polariton.csv"), transmission_csv(cal.energies(), &spectrum, step)))
        .and_then(|_| std::fs::write(dir.join("calibration.json"), serde_json::to_string_pretty(&report).expect("serializable")));
    if let Err(e) = written {
        eprintln!("cannot write outputs: {e}");
        return EXIT_NUMERICAL;
    }
    println!(
        "E_cav = {:.4} eV, E_LP = {:.4} eV, E_UP = {:.4} eV, n0 = {:e} m^-3",
        calibration.cavity_ev, calibration.lower_ev, calibration.upper_ev, calibration.solvent_density
    );
    EXIT_OK
}
