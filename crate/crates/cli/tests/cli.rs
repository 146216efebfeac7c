use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_cutlab");

fn cutlab(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("spawn cutlab")
}

fn config(dir: &TempDir, name: &str, body: &str) -> String {
    let path: PathBuf = dir.path().join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn eynard(dir: &TempDir) -> String {
    config(dir, "eynard3.json", r#"{"type": "eynard", "e": 3.0}"#)
}

fn quadratic(dir: &TempDir) -> String {
    config(dir, "x2.json", r#"{"type": "poly", "coeffs": [0, 0, 1]}"#)
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

/// Pulls a numeric field out of a flat JSON report.
fn field(json: &str, key: &str) -> f64 {
    let tag = format!("\"{key}\":");
    let start = json.find(&tag).unwrap_or_else(|| panic!("{key} missing in {json}")) + tag.len();
    let rest = &json[start..];
    let end = rest.find([',', '}']).unwrap();
    rest[..end].parse().unwrap()
}

fn assert_error_line(out: &Output, kind: &str) {
    let err = stderr(out);
    let last = err.lines().last().expect("stderr empty");
    assert!(
        last.starts_with(&format!("{{\"error\":\"{kind}\"")),
        "unexpected error line {last:?}"
    );
}

#[test]
fn detect_eynard() {
    let dir = TempDir::new().unwrap();
    let out = cutlab(&["detect", "--potential", &eynard(&dir)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let json = stdout(&out);
    assert!((field(&json, "x_star") - 3.0).abs() < 1e-6);
    let golden = 2.0 * ((1.0 + 5f64.sqrt()) / 2.0).ln();
    assert!((field(&json, "J") - golden).abs() < 1e-8);
    assert!(field(&json, "c") > 0.0);
    assert!(field(&json, "phi").abs() < 1e-6);
}

#[test]
fn eqm_semicircle() {
    let dir = TempDir::new().unwrap();
    let out = cutlab(&["eqm", "--potential", &quadratic(&dir)]);
    assert_eq!(out.status.code(), Some(0));
    let json = stdout(&out);
    assert!((field(&json, "a") + 2f64.sqrt()).abs() < 1e-7);
    assert!((field(&json, "b") - 2f64.sqrt()).abs() < 1e-7);
    assert!(json.contains("\"h_coeffs\":[1.0000000000000000e0]"), "{json}");
}

#[test]
fn detect_without_singular_point_exits_one() {
    let dir = TempDir::new().unwrap();
    let out = cutlab(&["detect", "--potential", &quadratic(&dir)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
    assert_error_line(&out, "no-singular-point");
    assert!(stderr(&out).contains("no singular exterior point"));
}

#[test]
fn unknown_command_and_flag_exit_two() {
    let out = cutlab(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("Usage"));
    assert_error_line(&out, "usage");

    let out = cutlab(&["detect", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert_error_line(&out, "usage");
}

#[test]
fn bad_config_and_missing_flags_exit_two() {
    let dir = TempDir::new().unwrap();
    let bad = config(&dir, "bad.json", r#"{"type": "poly", "coeffs": [0, 0, 1], "x": 1}"#);
    let out = cutlab(&["eqm", "--potential", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert_error_line(&out, "config");

    let out = cutlab(&["eqm", "--potential", "/nonexistent/v.json"]);
    assert_eq!(out.status.code(), Some(2));

    let out = cutlab(&["kernel", "--potential", &eynard(&dir), "--s", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert_error_line(&out, "invalid-parameter");

    let out = cutlab(&["psi", "--k", "1", "--zeta", "1.5,0"]);
    assert_eq!(out.status.code(), Some(2));
    assert_error_line(&out, "off-axis-required");
}

#[test]
fn every_error_is_a_single_json_line() {
    let dir = TempDir::new().unwrap();
    let cases: Vec<Vec<String>> = vec![
        vec!["detect".into(), "--potential".into(), quadratic(&dir)],
        vec!["eqm".into(), "--potential".into(), quadratic(&dir), "--t".into(), "5".into()],
        vec!["count".into(), "--potential".into(), eynard(&dir), "--n".into(), "80".into()],
    ];
    for args in cases {
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        let out = cutlab(&refs);
        assert_ne!(out.status.code(), Some(0), "{args:?}");
        let err = stderr(&out);
        assert_eq!(err.lines().count(), 1, "{err}");
        assert!(err.starts_with("{\"error\":") && err.trim_end().ends_with('}'));
    }
}

#[test]
fn kernel_csv_shape() {
    let dir = TempDir::new().unwrap();
    let out = cutlab(&[
        "kernel", "--potential", &eynard(&dir), "--n", "80", "--s", "1", "--grid", "-1,1,0.5",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "u,v,value");
    assert_eq!(lines.len(), 1 + 25);
    assert!(lines[1].starts_with("-1.0000000000000000e0,-1.0000000000000000e0,"));
}

#[test]
fn gue_and_psi_reports() {
    let out = cutlab(&["gue", "--k", "1", "--grid", "0,1,1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let first: f64 = text.lines().nth(1).unwrap().split(',').nth(2).unwrap().parse().unwrap();
    assert!((first - std::f64::consts::PI.sqrt().recip()).abs() < 1e-14);

    let out = cutlab(&["psi", "--k", "2", "--zeta", "0.3,0.7"]);
    assert_eq!(out.status.code(), Some(0));
    let json = stdout(&out);
    let det = &json[json.find("\"det\":[").unwrap() + 7..];
    let re: f64 = det[..det.find(',').unwrap()].parse().unwrap();
    assert!((re - 1.0).abs() < 1e-8, "{json}");
}

#[test]
fn compare_lambda_and_count() {
    let dir = TempDir::new().unwrap();
    let v = eynard(&dir);
    let out = cutlab(&[
        "compare", "--n", "80", "--s", "1.0", "--potential", &v, "--grid", "-3,3,0.25",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let json = stdout(&out);
    assert_eq!(field(&json, "k"), 1.0);
    assert!(field(&json, "sup_error") >= field(&json, "best_sup_error"));

    let out = cutlab(&["lambda-fit", "--n", "80", "--s", "1.5", "--potential", &v]);
    assert_eq!(out.status.code(), Some(0));
    let json = stdout(&out);
    assert!((field(&json, "lambda_plus") + field(&json, "lambda_minus") - 1.0).abs() < 1e-15);

    let out = cutlab(&["count", "--n", "80", "--s", "-1", "--potential", &v]);
    assert_eq!(out.status.code(), Some(0));
    let json = stdout(&out);
    assert!(field(&json, "count") < 0.1);
    assert!((field(&json, "window") - 0.25).abs() < 1e-9);
}

#[test]
fn sweep_csv() {
    let dir = TempDir::new().unwrap();
    let out = cutlab(&[
        "sweep",
        "--potential",
        &eynard(&dir),
        "--n-list",
        "80,160",
        "--s-list",
        "-1,1",
        "--grid",
        "-2,2,0.5",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n,s,k,delta,sup_error,l2_error,lambda_plus,expected_count,decay_exponent"
    );
    assert_eq!(lines.count(), 4);
}

#[test]
fn out_flag_writes_file() {
    let dir = TempDir::new().unwrap();
    let target = dir.path().join("report.json");
    let out = cutlab(&[
        "eqm",
        "--potential",
        &quadratic(&dir),
        "--mass",
        "0.99",
        "--out",
        target.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let json = fs::read_to_string(target).unwrap();
    assert!((field(&json, "b") - 1.98f64.sqrt()).abs() < 1e-8);
}

#[test]
fn identical_invocations_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let v = eynard(&dir);
    let runs: [&[&str]; 4] = [
        &["detect", "--potential", &v],
        &["kernel", "--potential", &v, "--n", "80", "--s", "1.2", "--grid", "-2,2,0.5"],
        &["sweep", "--potential", &v, "--n-list", "80,120", "--s-list", "1", "--grid", "-2,2,1"],
        &["count", "--potential", &v, "--n", "80", "--s", "2"],
    ];
    for args in runs {
        let first = cutlab(args);
        let second = cutlab(args);
        assert_eq!(first.status.code(), Some(0), "{}", stderr(&first));
        assert_eq!(first.stdout, second.stdout, "{args:?}");
    }
}
