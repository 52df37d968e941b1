//! End-to-end tests of the ringbounds binary: JSON schema, exit codes,
//! config-file handling, seed precedence, and bit-exact reproducibility.

use std::process::{Command, Output};

fn binary() -> &'static str {
    env!("CARGO_BIN_EXE_ringbounds")
}

fn run(args: &[&str]) -> Output {
    Command::new(binary())
        .args(args)
        .env_remove("RINGBOUNDS_SEED")
        .output()
        .expect("binary runs")
}

fn json_of(output: &Output) -> serde_json::Value {
    serde_json::from_slice(&output.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&output.stdout)
        )
    })
}

#[test]
fn modulus_reports_the_closed_form() {
    let output = run(&["modulus", "--n", "3", "--p", "2", "--r1", "0.5", "--r2", "1"]);
    assert_eq!(output.status.code(), Some(0));
    let report = json_of(&output);
    assert_eq!(report["command"], "modulus");
    assert_eq!(report["verdict"], "pass");
    let exact = report["values"]["exact"].as_f64().unwrap();
    assert!((exact - 4.0 * std::f64::consts::PI).abs() < 1e-12);
    let discrete = report["values"]["discrete"].as_f64().unwrap();
    assert!(((discrete - exact) / exact).abs() <= 0.02);
    // schema basics
    assert_eq!(report["seed"], 42);
    assert!(report["tags"]["exact"].is_string());
    assert!(report["constants"]["omega"].is_number());
    assert!(report["constants"]["Omega"].is_number());
    assert!(report["config"]["r1"].is_number());
}

#[test]
fn degenerate_ring_is_a_usage_error() {
    let output = run(&["modulus", "--n", "3", "--p", "2", "--r1", "1", "--r2", "1"]);
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    let lines: Vec<&str> = stderr.trim().lines().collect();
    assert_eq!(lines.len(), 1, "diagnostics must be single-line: {stderr}");
    assert!(lines[0].contains("degenerate ring"), "{stderr}");
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let output = run(&["modulus", "--bogus", "1"]);
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("usage"), "{stderr}");
}

#[test]
fn sharpness_scan_passes_at_machine_precision() {
    let output = run(&["sharpness", "--case", "stretch", "--a", "2", "--n", "3"]);
    assert_eq!(output.status.code(), Some(0));
    let report = json_of(&output);
    assert_eq!(report["verdict"], "pass");
    let drift = report["values"]["max_abs_ratio_minus_1"].as_f64().unwrap();
    assert!(drift <= 1e-12, "drift {drift}");
    let gamma0 = report["constants"]["gamma0"].as_f64().unwrap();
    assert!((gamma0 - 2.0).abs() < 1e-12);
}

#[test]
fn failed_verification_exits_2() {
    let output = run(&[
        "verify-definition",
        "--n",
        "3",
        "--p",
        "2",
        "--a",
        "2",
        "--scale",
        "0.9",
        "--trials",
        "10",
        "--grid",
        "128",
    ]);
    assert_eq!(output.status.code(), Some(2));
    let report = json_of(&output);
    assert_eq!(report["verdict"], "fail");
}

#[test]
fn reports_are_bit_reproducible() {
    let args = [
        "extremal", "--n", "3", "--p", "2.5", "--r1", "0.4", "--r2", "0.9", "--grid", "256",
        "--trials", "20", "--seed", "7",
    ];
    let first = run(&args);
    let second = run(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout, "same seed must give identical bytes");
}

#[test]
fn seed_precedence_flag_env_default() {
    let by_default = run(&["modulus", "--n", "2", "--p", "2", "--r1", "0.5", "--r2", "1", "--grid", "0"]);
    assert_eq!(json_of(&by_default)["seed"], 42);

    let by_env = Command::new(binary())
        .args(["modulus", "--n", "2", "--p", "2", "--r1", "0.5", "--r2", "1", "--grid", "0"])
        .env("RINGBOUNDS_SEED", "99")
        .output()
        .unwrap();
    assert_eq!(json_of(&by_env)["seed"], 99);

    let by_flag = Command::new(binary())
        .args([
            "modulus", "--n", "2", "--p", "2", "--r1", "0.5", "--r2", "1", "--grid", "0",
            "--seed", "5",
        ])
        .env("RINGBOUNDS_SEED", "99")
        .output()
        .unwrap();
    assert_eq!(json_of(&by_flag)["seed"], 5);
}

#[test]
fn config_file_fills_gaps_and_flags_override() {
    let dir = std::env::temp_dir().join("ringbounds-cli-int");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("run.cfg");
    std::fs::write(
        &path,
        "# ring modulus scenario\n[modulus]\nn = 3\np = 2\nr1 = 0.5\nr2 = 1\ngrid = 0\n",
    )
    .unwrap();
    let from_file = run(&["modulus", "--config", path.to_str().unwrap()]);
    assert_eq!(from_file.status.code(), Some(0));
    let report = json_of(&from_file);
    assert_eq!(report["config"]["p"], serde_json::json!(2.0));

    // flag beats file
    let overridden = run(&[
        "modulus",
        "--config",
        path.to_str().unwrap(),
        "--p",
        "3",
    ]);
    let report = json_of(&overridden);
    assert_eq!(report["config"]["p"], serde_json::json!(3.0));

    // unknown key rejected with a line number
    let bad = dir.join("bad.cfg");
    std::fs::write(&bad, "[modulus]\nn = 3\nwhat = 1\n").unwrap();
    let output = run(&["modulus", "--config", bad.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("line 3") && stderr.contains("what"), "{stderr}");
}

fn temp_space() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join("ringbounds-cli-int");
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn csv_mirrors_the_tables() {
    let dir = temp_space();
    let csv_path = dir.join("scan.csv");
    let out_path = dir.join("scan.json");
    let output = run(&[
        "schwarz",
        "--n",
        "3",
        "--p",
        "3",
        "--a",
        "2",
        "--points",
        "5",
        "--out",
        out_path.to_str().unwrap(),
        "--csv",
        csv_path.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0));
    assert!(output.stdout.is_empty(), "--out suppresses stdout");
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("table,r,bound,measured,slack"));
    assert_eq!(lines.count(), 5);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(report["verdict"], "pass");
}

#[test]
fn infinite_values_are_strings_in_json() {
    // a vanishing weight drives the radial integral to +inf and the
    // upper bound to 0, both of which must serialize cleanly
    let output = run(&[
        "integral-i",
        "--n",
        "3",
        "--p",
        "2",
        "--r1",
        "0.5",
        "--r2",
        "1",
        "--weight",
        "constant:0",
    ]);
    assert_eq!(output.status.code(), Some(0));
    let report = json_of(&output);
    assert_eq!(report["values"]["i_value"], serde_json::json!("inf"));
    assert_eq!(report["values"]["cap_upper"], serde_json::json!(0.0));
    let text = String::from_utf8_lossy(&output.stdout);
    assert!(!text.contains("Infinity") && !text.contains("NaN"));
}
