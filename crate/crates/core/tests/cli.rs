mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use common::*;
use rand::Rng;
use sovkit::harness::{fmt_f64, read_csv, write_csv, CurveDocument, LaxDocument, Table};
use sovkit::rational::random_generic_instance;

const GENERIC: &str = r#"{"r": 2, "n": 1, "coeffs": [[[[0.3, 0.1], [0.2, 0]], [[0.1, -0.4], [-0.2, 0.1]]], [[[1, 0], [0, 0]], [[0, 0], [-1, 0.5]]]]}"#;

fn sovkit(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sovkit"))
        .args(args)
        .env("SOVKIT_OUT", out)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn put(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn instance_file(dir: &Path, r: usize, n: usize, seed: u64) -> String {
    let phi = random_generic_instance(r, n, &mut rng(seed));
    put(dir, &format!("inst_{r}_{n}_{seed}.json"), &serde_json::to_string(&LaxDocument::from_matpoly(&phi)).unwrap())
}

#[test]
fn exit_codes_follow_the_error_class() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let missing = put(dir.path(), "missing.json", r#"{"r": 2, "coeffs": []}"#);
    let unknown = put(dir.path(), "unknown.json", r#"{"r": 1, "n": 0, "coeffs": [[[[1, 0]]]], "extra": true}"#);
    let diagonal = put(
        dir.path(),
        "diagonal.json",
        r#"{"r": 2, "n": 1, "coeffs": [[[[0.3, 0], [0, 0]], [[0, 0], [-0.2, 0.1]]], [[[1, 0], [0, 0]], [[0, 0], [0.5, 0.5]]]]}"#,
    );
    let flat = put(dir.path(), "flat.json", r#"{"taus": [[0.0, 0.01]], "ranks": [2]}"#);
    let generic = put(dir.path(), "generic.json", GENERIC);

    let o = sovkit(&["spectral", "--input", &missing], &out);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains('n'));
    assert_eq!(code(&sovkit(&["spectral", "--input", &unknown], &out)), 2);
    assert_eq!(code(&sovkit(&["spectral"], &out)), 2);
    assert_eq!(code(&sovkit(&["spectral", "--input", &diagonal], &out)), 3);
    assert_eq!(code(&sovkit(&["theta", "--input", &flat], &out)), 4);
    assert_eq!(code(&sovkit(&["flow", "--input", &generic, "--ham", "7,0"], &out)), 2);
    assert_eq!(code(&sovkit(&["flow", "--input", &generic, "--tol-scale", "-1"], &out)), 2);
    assert_eq!(code(&sovkit(&["spectral", "--input", &generic], &out)), 0);
}

#[test]
fn spectral_output_round_trips_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let input = instance_file(dir.path(), 3, 2, 11);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(code(&sovkit(&["spectral", "--input", &input], &a)), 0);
    let first = std::fs::read_to_string(a.join("curve.json")).unwrap();
    let curve: CurveDocument = serde_json::from_str(&first).unwrap();
    assert_eq!(curve.genus, 4);
    let again = put(dir.path(), "again.json", &serde_json::to_string(&curve.instance).unwrap());
    assert_eq!(code(&sovkit(&["spectral", "--input", &again], &b)), 0);
    assert_eq!(first, std::fs::read_to_string(b.join("curve.json")).unwrap());
}

#[test]
fn csv_floats_survive_a_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let mut g = rng(5);
    let mut table = Table::new(&["x", "y"]);
    let mut values = vec![];
    for _ in 0..200 {
        let x: f64 = g.gen_range(-1.0..1.0) * 10f64.powi(g.gen_range(-300..300));
        let y: f64 = g.gen_range(-1e3..1e3);
        values.push((x, y));
        table.push(vec![fmt_f64(x), fmt_f64(y)]);
    }
    write_csv(&path, &table).unwrap();
    let back = read_csv(&path).unwrap();
    assert_eq!(back.header, table.header);
    for (i, (x, y)) in values.iter().enumerate() {
        let (bx, by) = (back.float(i, "x").unwrap(), back.float(i, "y").unwrap());
        assert!((bx - x).abs() <= 1e-15 * x.abs());
        assert!((by - y).abs() <= 1e-15 * y.abs());
    }
}

fn points(out: &Path) -> Table {
    read_csv(&out.join("points.csv")).unwrap()
}

#[test]
fn sov_target_is_xi_for_the_pure_quadratic_bracket() {
    let dir = tempfile::tempdir().unwrap();
    let input = instance_file(dir.path(), 2, 2, 3);
    let out = dir.path().join("out");
    let o = sovkit(&["sov", "--input", &input, "--bracket", r#"{"a": [], "b": [1, 0]}"#], &out);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let t = points(&out);
    assert_eq!(t.rows.len(), 2);
    for i in 0..t.rows.len() {
        assert_eq!(t.float(i, "target_re"), t.float(i, "xi_re"));
        assert_eq!(t.float(i, "target_im"), t.float(i, "xi_im"));
    }
}

#[test]
fn rank_one_has_an_empty_divisor() {
    let dir = tempfile::tempdir().unwrap();
    let input = put(dir.path(), "r1.json", r#"{"r": 1, "n": 2, "coeffs": [[[[0.5, 0]]], [[[0, 1]]], [[[1, 0]]]]}"#);
    let out = dir.path().join("out");
    assert_eq!(code(&sovkit(&["sov", "--input", &input], &out)), 0);
    let t = points(&out);
    assert_eq!(t.header.len(), 7);
    assert!(t.rows.is_empty());
}

#[test]
fn flow_writes_a_linear_table() {
    let dir = tempfile::tempdir().unwrap();
    let input = instance_file(dir.path(), 2, 2, 8);
    let out = dir.path().join("out");
    let o = sovkit(&["flow", "--input", &input, "--samples", "5", "--t-max", "0.5"], &out);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let t = read_csv(&out.join("flow.csv")).unwrap();
    assert_eq!(t.rows.len(), 5);
    for i in 0..5 {
        assert!(t.float(i, "drift").unwrap() < 1e-8);
        assert!(t.float(i, "q0_dev").unwrap() < 1e-5);
    }
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("flow_report.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], true);
}

#[test]
fn tightened_tolerances_fail_without_crashing() {
    let dir = tempfile::tempdir().unwrap();
    let input = instance_file(dir.path(), 2, 2, 8);
    let out = dir.path().join("out");
    let o = sovkit(&["flow", "--input", &input, "--samples", "5", "--tol-scale", "1e-30"], &out);
    assert_eq!(code(&o), 1);
    assert!(out.join("flow_report.json").is_file());
    let o = sovkit(&["accept", "--suite", "2", "--tol-scale", "1e-30", "--workers", "1"], &out);
    assert_eq!(code(&o), 1);
    let summary = std::fs::read_to_string(out.join("summary.txt")).unwrap();
    assert!(summary.starts_with("criterion 2 (Jacobi identity): FAIL"));
}

#[test]
fn output_directory_comes_from_flag_or_environment() {
    let dir = tempfile::tempdir().unwrap();
    let input = put(dir.path(), "g.json", GENERIC);
    let env_out = dir.path().join("env");
    let flag_out: PathBuf = dir.path().join("flag");
    assert_eq!(code(&sovkit(&["spectral", "--input", &input], &env_out)), 0);
    assert!(env_out.join("curve.json").is_file());
    let o = sovkit(&["spectral", "--input", &input, "--out", flag_out.to_str().unwrap()], &env_out.join("unused"));
    assert_eq!(code(&o), 0);
    assert!(flag_out.join("curve.json").is_file());
    assert!(!env_out.join("unused").exists());
}

#[test]
fn accept_reads_a_config_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = put(dir.path(), "cfg.json", r#"{"seed": 9, "suites": [7], "tolerances": {"c7": 1e-40}}"#);
    let out = dir.path().join("out");
    let o = sovkit(&["accept", "--input", &cfg, "--workers", "1"], &out);
    assert_eq!(code(&o), 1);
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["seed"], 9);
    let records = report["records"].as_array().unwrap();
    assert!(!records.is_empty());
    assert!(records.iter().all(|r| r["criterion"] == 7 && r["tolerance"] == 1e-40));
    let bad = put(dir.path(), "bad.json", r#"{"seed": 9, "suites": [12]}"#);
    assert_eq!(code(&sovkit(&["accept", "--input", &bad], &out)), 2);
}
