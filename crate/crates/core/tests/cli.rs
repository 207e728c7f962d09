//! Command-line contract: exit codes, error lines, output files.

use std::path::Path;
use std::process::{Command, Output};

use cbs_core::run::{read_csv, SWEEP_HEADER};

fn cbs(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cbs"))
        .args(args)
        .current_dir(dir)
        .env("CBS_WORKERS", "1")
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

#[test]
fn sweep_writes_reproducible_csv() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "run.cfg", "sweep_s = logspace(0.001, 1000, 4)\noutput_dir = a\n");
    let out = cbs(dir.path(), &["alpha-sweep", "run.cfg"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let first = std::fs::read(dir.path().join("a/alpha_sweep.csv")).unwrap();
    let out = cbs(dir.path(), &["alpha-sweep", "run.cfg"]);
    assert!(out.status.success());
    assert_eq!(std::fs::read(dir.path().join("a/alpha_sweep.csv")).unwrap(), first);

    let t = read_csv(std::str::from_utf8(&first).unwrap()).unwrap();
    assert_eq!(t.header, SWEEP_HEADER);
    let alpha = t.column("alpha").unwrap();
    assert!((alpha[0] - 2.0).abs() < 0.02);
    assert!((alpha[3] - 23.0 / 21.0).abs() < 0.02 * 23.0 / 21.0);
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "run.cfg", "sweep_s = 0.5\norientation = isotropic\norientation_samples = 2\nseed = 1\n");
    assert!(cbs(dir.path(), &["--seed", "42", "alpha-sweep", "run.cfg"]).status.success());
    let t = read_csv(&std::fs::read_to_string(dir.path().join("alpha_sweep.csv")).unwrap()).unwrap();
    assert_eq!(t.meta("seed"), Some("42"));
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "bad.cfg", "detuning = 0\nkr = 5\n");
    let out = cbs(dir.path(), &["alpha-sweep", "bad.cfg"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.starts_with("ERROR:"), "{err}");
    assert!(err.contains("line 2") && err.contains("kr ≥ 10 required"), "{err}");

    write(dir.path(), "unknown.cfg", "colour = blue\n");
    let out = cbs(dir.path(), &["spectrum", "unknown.cfg"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));

    let out = cbs(dir.path(), &["alpha-sweep", "missing.cfg"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn uncovered_spectrum_grid_is_rejected_before_solving() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "s.cfg", "rabi = 100\nomega_grid = uniform(-120, 120, 0.1)\n");
    let out = cbs(dir.path(), &["spectrum", "s.cfg"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("ERROR:"));
    assert!(!dir.path().join("spectrum.csv").exists());
}

#[test]
fn failed_points_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "s.cfg", "sweep_s = 0.1, 1\naxis = 0, 0, 1\n");
    let out = cbs(dir.path(), &["alpha-sweep", "s.cfg"]);
    assert_eq!(out.status.code(), Some(2));
    let t = read_csv(&std::fs::read_to_string(dir.path().join("alpha_sweep.csv")).unwrap()).unwrap();
    assert_eq!(t.header.last().unwrap(), "error");
    assert_eq!(t.rows.len(), 2);
}

#[test]
fn small_spectrum_run() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "s.cfg", "rabi = 8\ndetuning = 2\noutput_dir = out\n");
    let out = cbs(dir.path(), &["spectrum", "s.cfg"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("out/spectrum.csv")).unwrap();
    let t = read_csv(&text).unwrap();
    assert_eq!(t.header, ["omega_over_gamma", "background_density", "interference_density"]);
    let w = t.column("omega_over_gamma").unwrap();
    assert!(w.windows(2).all(|p| p[1] > p[0]));
    let report = std::fs::read_to_string(dir.path().join("out/spectrum_report.txt")).unwrap();
    for key in ["mollow_central", "autler_townes_minus", "area_ratio", "alpha ="] {
        assert!(report.contains(key), "{key}");
    }
}

#[test]
fn peaks_and_workers() {
    let dir = tempfile::tempdir().unwrap();
    let out = cbs(dir.path(), &["peaks", "--rabi", "100", "--detuning", "20"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("autler_townes_plus   40.990195"), "{text}");
    assert!(text.contains("hyper_raman_minus    -203.960781"));

    let out = Command::new(env!("CARGO_BIN_EXE_cbs"))
        .args(["peaks", "--rabi", "1"])
        .env("CBS_WORKERS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
