use std::path::Path;
use std::process::{Command, Output};

fn octsbfem(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_octsbfem"))
        .args(args)
        .current_dir(dir)
        .env_remove("OCTSBFEM_BACKEND")
        .env_remove("OCTSBFEM_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn beam_config(dir: &Path, duration: f64, extra: &str) {
    let text = format!(
        r#"{{
  "mesh": {{ "path": "beam.octm" }},
  "signals": [{{ "kind": "ricker", "t1": 0.015, "p0": 1.0 }}],
  "fixed": [{{ "plane": {{ "axis": 0, "coord": 0.0 }} }}],
  "tractions": [{{ "plane": {{ "axis": 0, "coord": 16.0 }}, "traction": [-1.0, 0.0, 0.0], "signal": 0 }}],
  "time": {{ "duration": {duration} }},
  "probes": [{{ "name": "tip", "point": [16.0, 0.0, 0.0] }}, {{ "name": "mid", "node": 3 }}],
  "snapshot_every": 20{extra}
}}"#
    );
    std::fs::write(dir.join("beam.json"), text).unwrap();
}

#[test]
fn beam_run_writes_csv_vtk_and_results() {
    let dir = tempfile::tempdir().unwrap();
    ok(&octsbfem(&["mesh", "--builtin", "beam", "--resolution", "1", "-o", "beam.octm"], dir.path()));
    beam_config(dir.path(), 0.02, "");
    let out = dir.path().join("out");
    ok(&octsbfem(&["run", "beam.json", "--output-dir", out.to_str().unwrap()], dir.path()));
    let csv = std::fs::read_to_string(out.join("probe_tip.csv")).unwrap();
    assert!(csv.starts_with("t [s],u_x [m]"));
    let rows = octree_sbfem::io::parse_probe_csv(&csv).unwrap();
    assert!(rows.iter().any(|r| r[1] != 0.0));
    let vtk = std::fs::read_to_string(out.join("snapshot_00000000.vtk")).unwrap();
    octree_sbfem::io::parse_vtk(&vtk).unwrap();
    assert!(out.join("summary.json").exists() && out.join("timing.csv").exists());

    let extracted = ok(&octsbfem(&["probe", "out/results.bin", "--name", "tip"], dir.path()));
    assert_eq!(extracted, csv);
}

#[test]
fn parallel_run_matches_serial_and_honors_env() {
    let dir = tempfile::tempdir().unwrap();
    ok(&octsbfem(&["mesh", "--builtin", "beam", "--resolution", "2", "-o", "beam.octm"], dir.path()));
    beam_config(dir.path(), 0.01, "");
    ok(&octsbfem(&["run", "beam.json", "--output-dir", "serial"], dir.path()));
    let out = Command::new(env!("CARGO_BIN_EXE_octsbfem"))
        .args(["run", "beam.json", "--workers", "4"])
        .current_dir(dir.path())
        .env("OCTSBFEM_BACKEND", "threads")
        .env("OCTSBFEM_OUTPUT_DIR", "parallel")
        .output()
        .unwrap();
    ok(&out);
    for name in ["probe_tip.csv", "probe_mid.csv"] {
        let a = std::fs::read(dir.path().join("serial").join(name)).unwrap();
        let b = std::fs::read(dir.path().join("parallel").join(name)).unwrap();
        assert_eq!(a, b, "{name}");
    }
    assert!(dir.path().join("parallel/partition.json").exists());
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    ok(&octsbfem(&["mesh", "--builtin", "beam", "--resolution", "1", "-o", "beam.octm"], dir.path()));
    let out = octsbfem(&["partition", "--mesh", "beam.octm", "--parts", "3"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("power of two"));

    beam_config(dir.path(), 0.01, r#", "workers": 3"#);
    assert_eq!(octsbfem(&["run", "beam.json"], dir.path()).status.code(), Some(2));

    std::fs::write(dir.path().join("bad.json"), r#"{"mesh": {"path": "beam.octm"}, "bogus": 1}"#).unwrap();
    assert_eq!(octsbfem(&["run", "bad.json"], dir.path()).status.code(), Some(2));

    std::fs::write(dir.path().join("broken.octm"), b"OCTM\x01garbage").unwrap();
    let out = octsbfem(&["partition", "--mesh", "broken.octm", "--parts", "2"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn precompute_fills_the_catalog() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = ok(&octsbfem(&["precompute", "--nu", "0.3", "--cache", "cells.bin"], dir.path()));
    assert!(stdout.starts_with("144 master cells"), "{stdout}");
    let cat = octree_sbfem::pattern::cache::read(&dir.path().join("cells.bin")).unwrap();
    assert_eq!(cat.len(), 144);
}

#[test]
fn partition_and_geometry_mesh() {
    let dir = tempfile::tempdir().unwrap();
    let geometry = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/inclusion_geometry.json");
    ok(&octsbfem(
        &["mesh", "--geometry", geometry.to_str().unwrap(), "-o", "inc.octm", "--vtk", "inc.vtk"],
        dir.path(),
    ));
    let json = ok(&octsbfem(&["partition", "--mesh", "inc.octm", "--parts", "4"], dir.path()));
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["n_parts"], 4);
}

#[test]
fn signal_reports_critical_frequency() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = ok(&octsbfem(
        &["signal", "--kind", "ricker", "--t1", "1", "--series", "s.csv", "--spectrum", "f.csv"],
        dir.path(),
    ));
    assert!(stdout.contains("/t1"), "{stdout}");
    let lines = std::fs::read_to_string(dir.path().join("f.csv")).unwrap().lines().count();
    assert_eq!(lines, 202);
}

#[test]
fn verify_runs_a_quick_suite() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = ok(&octsbfem(&["verify", "--suite", "9", "--suite", "10"], dir.path()));
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 2, "{stdout}");
}
