//! CSV and manifest files.
//!
//! Every CSV starts with one header row of `key=value` cells naming the
//! quantity, its units and the sample spacing, followed by one row per
//! sample:
//!
//! ```text
//! quantity=rho_22,units=1,sample_interval_s=8.339102379479289e-18,start_time_s=0e0
//! 0e0,0e0
//! 8.339102379479289e-18,1.2e-30
//! ```
//!
//! Spectra use `bin_width_ev` and `window` cells instead and have
//! `energy_ev,magnitude` rows. Numbers are written in Rust's shortest
//! round-trip form, so identical runs give identical bytes.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use mbfdtd_core::observables::TimeSeries;
use mbfdtd_core::ScenarioSpec;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::spectrum::Spectrum;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_FORMAT: &str = "mbfdtd-run/1";

pub fn series_csv(series: &TimeSeries) -> String {
    let mut out = format!(
        "quantity={},units={},sample_interval_s={:e},start_time_s={:e}\n",
        series.label, series.units, series.sample_interval, series.start_time
    );
    for (k, v) in series.values.iter().enumerate() {
        out.push_str(&format!("{:e},{:e}\n", series.time_at(k), v));
    }
    out
}

pub fn spectrum_csv(spectrum: &Spectrum) -> String {
    let mut out = format!(
        "quantity=spectrum:{},units=arb,bin_width_ev={:e},window={}\n",
        spectrum.source,
        spectrum.bin_width_ev(),
        spectrum.window.label()
    );
    for (e, m) in spectrum.energies_ev.iter().zip(&spectrum.magnitude) {
        out.push_str(&format!("{e:e},{m:e}\n"));
    }
    out
}

/// Header cells and the second column of a CSV written by [`series_csv`].
pub fn parse_series_csv(text: &str) -> Option<(BTreeMap<String, String>, Vec<f64>)> {
    let mut lines = text.lines();
    let header = lines
        .next()?
        .split(',')
        .map(|cell| cell.split_once('=').map(|(k, v)| (k.to_string(), v.to_string())))
        .collect::<Option<BTreeMap<_, _>>>()?;
    let values = lines
        .map(|l| l.split_once(',').and_then(|(_, v)| v.parse().ok()))
        .collect::<Option<Vec<f64>>>()?;
    Some((header, values))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Path relative to the run directory.
    pub path: String,
    /// `timeseries` or `spectrum`.
    pub kind: String,
    pub quantity: String,
    pub units: String,
    pub rows: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub spec: ScenarioSpec,
    pub files: Vec<FileEntry>,
    pub metrics: BTreeMap<String, f64>,
    pub steps: u64,
    pub wall_clock_s: f64,
}

/// Collects files for one run directory and writes the manifest last.
#[derive(Debug)]
pub struct RunWriter {
    dir: PathBuf,
    files: Vec<FileEntry>,
}

impl RunWriter {
    pub fn create(dir: impl Into<PathBuf>) -> io::Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(RunWriter { dir, files: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn put(&mut self, name: &str, kind: &str, quantity: &str, units: &str, rows: usize, body: &str) -> io::Result<()> {
        fs::write(self.dir.join(name), body)?;
        self.files.push(FileEntry {
            path: name.to_string(),
            kind: kind.to_string(),
            quantity: quantity.to_string(),
            units: units.to_string(),
            rows,
            sha256: sha256_hex(body.as_bytes()),
        });
        Ok(())
    }

    pub fn series(&mut self, series: &TimeSeries) -> io::Result<()> {
        let name = format!("{}.csv", series.label);
        self.put(&name, "timeseries", &series.label, &series.units, series.len(), &series_csv(series))
    }

    pub fn spectrum(&mut self, spectrum: &Spectrum) -> io::Result<()> {
        let name = format!("spectrum_{}.csv", spectrum.source);
        let quantity = format!("spectrum:{}", spectrum.source);
        self.put(&name, "spectrum", &quantity, "arb", spectrum.magnitude.len(), &spectrum_csv(spectrum))
    }

    pub fn finish(self, spec: &ScenarioSpec, metrics: BTreeMap<String, f64>, steps: u64, wall_clock_s: f64) -> io::Result<Manifest> {
        let manifest = Manifest {
            format: MANIFEST_FORMAT.to_string(),
            spec: spec.clone(),
            files: self.files,
            metrics,
            steps,
            wall_clock_s,
        };
        let mut f = fs::File::create(self.dir.join(MANIFEST_FILE))?;
        serde_json::to_writer_pretty(&mut f, &manifest)?;
        f.write_all(b"\n")?;
        Ok(manifest)
    }
}

/// Read a manifest and check every listed file against its checksum.
pub fn verify_run_dir(dir: &Path) -> io::Result<Manifest> {
    let manifest: Manifest = serde_json::from_slice(&fs::read(dir.join(MANIFEST_FILE))?)?;
    for f in &manifest.files {
        let body = fs::read(dir.join(&f.path))?;
        if sha256_hex(&body) != f.sha256 {
            return Err(io::Error::new(io::ErrorKind::InvalidData, format!("checksum mismatch for {}", f.path)));
        }
    }
    Ok(manifest)
}
