//! Exit codes and files of the `mbfdtd` binary.

use std::path::Path;
use std::process::Command;

const SHORT_A: &str = "scenario = \"A\"\ntotal_time_fs = 20\ngrid_resolution_nm = 0.5\nvacuum_margin_nm = 20\n\
                       source_amplitude_v_per_m = 1e8\nsource_ramp_fs = 5\n[pml]\ncells = 32\n";

fn mbfdtd(args: &[&str], out: &Path) -> (i32, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_mbfdtd")).args(args).arg("--out").arg(out).output().unwrap();
    (o.status.code().unwrap(), String::from_utf8_lossy(&o.stdout).into_owned())
}

fn config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn run_writes_a_verified_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), "a.toml", SHORT_A);
    let out = tmp.path().join("out");
    let (code, _) = mbfdtd(&["run", &cfg], &out);
    assert_eq!(code, 0);
    mbfdtd::output::verify_run_dir(&out).unwrap();
}

#[test]
fn configuration_errors_exit_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let bad = config(tmp.path(), "bad.toml", "total_time_fs = 20\nsource_amplitude_v_per_m = 1\n");
    assert_eq!(mbfdtd(&["run", &bad], &out).0, 1);
    assert_eq!(mbfdtd(&["validate", &bad], &out).0, 1);
    assert_eq!(mbfdtd(&["run", "does-not-exist.toml"], &out).0, 1);
    let long = config(tmp.path(), "long.toml", &SHORT_A.replace("total_time_fs = 20", "total_time_s = 1"));
    assert_eq!(mbfdtd(&["run", &long], &out).0, 1);
    let good = config(tmp.path(), "a.toml", SHORT_A);
    assert_eq!(mbfdtd(&["sweep", &good, "--axis", "gap", "--values", "1,2"], &out).0, 1);
    assert_eq!(mbfdtd(&["sweep", &good, "--axis", "source_amplitude", "--values", "2,1"], &out).0, 1);
}

#[test]
fn validate_accepts_a_good_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), "a.toml", SHORT_A);
    let (code, stdout) = mbfdtd(&["validate", &cfg], &tmp.path().join("out"));
    assert_eq!(code, 0);
    assert!(stdout.contains("solute"), "{stdout}");
}

#[test]
fn numerical_failure_exits_with_two_and_dumps() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), "hot.toml", &SHORT_A.replace("= 1e8", "= 1e307"));
    let out = tmp.path().join("out");
    assert_eq!(mbfdtd(&["run", &cfg], &out).0, 2);
    assert!(out.join("failure_dump.csv").exists());
}

#[test]
fn partial_sweep_exits_with_three() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), "a.toml", SHORT_A);
    let out = tmp.path().join("sweep");
    let (code, stdout) = mbfdtd(&["sweep", &cfg, "--axis", "source_amplitude", "--values", "1e8,1e307V/m"], &out);
    assert_eq!(code, 3);
    assert!(stdout.starts_with("axis=source_amplitude,units=V/m"));
    assert!(out.join("summary.csv").exists());
    mbfdtd::output::verify_run_dir(&out.join("source_amplitude=1e8")).unwrap();
}
