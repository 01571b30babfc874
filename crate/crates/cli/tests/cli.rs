//! End-to-end runs of the `covbound` binary.

use serde_json::Value;
use std::process::{Command, Output};

const INTERVAL: &[&str] = &["--band", "-0.3:0.3"];
const SPLIT: &[&str] = &["--band", "-0.3:-0.1", "--band", "0.05:0.3"];

fn covbound(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_covbound"))
        .args(args)
        .output()
        .unwrap()
}

fn json_ok(args: &[&str]) -> Value {
    let out = covbound(args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

/// Runs a command expected to fail and returns `(exit code, error object)`.
fn json_err(args: &[&str]) -> (i32, Value) {
    let out = covbound(args);
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_slice(&out.stderr).unwrap();
    (out.status.code().unwrap(), v["error"].clone())
}

fn join<'a>(parts: &[&[&'a str]]) -> Vec<&'a str> {
    parts.iter().flat_map(|p| p.iter().copied()).collect()
}

#[test]
fn bound_reports_value_certificate_and_diagnostics() {
    let v = json_ok(&join(&[
        &["bound"],
        INTERVAL,
        &["--n", "3", "--tau", "1.5"],
    ]));
    assert_eq!(v["command"], "bound");
    assert!((v["bound"].as_f64().unwrap() - 0.016087551446).abs() <= 1e-9);
    assert!((v["bound"].as_f64().unwrap() - 2.0 * v["t_star"].as_f64().unwrap()).abs() <= 1e-15);
    assert_eq!(v["real_coefficients"], true);
    assert_eq!(v["q0"]["degree"], 3);
    assert_eq!(v["coefficients"].as_array().unwrap().len(), 7);
    assert!(!v["omega"].as_array().unwrap().is_empty());
    assert!(v["duality_gap"].as_f64().unwrap().abs() <= 1e-6);
    assert!(v["certificate"]["tv_norm"].as_f64().unwrap() <= 1.0 + 1e-6);
    assert_eq!(v["diagnostics"]["minimax"]["status"], "Optimal");
    assert_eq!(v["config"]["tol"], 1e-8);
}

#[test]
fn integer_lag_bound_vanishes() {
    let v = json_ok(&join(&[&["bound"], INTERVAL, &["--n", "3", "--tau", "2"]]));
    assert!(v["bound"].as_f64().unwrap() <= 1e-8);
}

#[test]
fn overlapping_intervals_are_merged_with_a_note() {
    let v = json_ok(&[
        "bound", "--band", "-0.3:0", "--band", "-0.1:0.3", "--n", "3", "--tau", "1.5",
    ]);
    assert_eq!(v["band"], serde_json::json!([[-0.3, 0.3]]));
    assert!(v["band_note"].as_str().unwrap().contains("merged"));
    let plain = json_ok(&join(&[
        &["bound"],
        INTERVAL,
        &["--n", "3", "--tau", "1.5"],
    ]));
    assert!(plain["band_note"].is_null());
    assert_eq!(plain["bound"], v["bound"]);
}

#[test]
fn sweep_csv_has_comment_header_and_one_row_per_lag() {
    let out = covbound(&join(&[
        &["sweep"],
        INTERVAL,
        &[
            "--n",
            "3",
            "--tau-range",
            "0:7",
            "--points",
            "15",
            "--exact",
            "--phases",
            "12",
        ],
        &["--grid-step", "0.005", "--format", "csv"],
    ]));
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data[0], "tau,bound,exact,gap");
    assert_eq!(data.len(), 16);
    let first: Vec<&str> = data[1].split(',').collect();
    assert_eq!(first.len(), 4);
    assert_eq!(first[0].parse::<f64>().unwrap(), 0.0);
    let last: Vec<f64> = data[15].split(',').map(|c| c.parse().unwrap()).collect();
    assert_eq!(last[0], 7.0);
    assert!((last[1] - last[2] - last[3]).abs() <= 1e-9);
}

#[test]
fn sweep_json_carries_curve_and_metadata() {
    let v = json_ok(&join(&[
        &["sweep"],
        SPLIT,
        &[
            "--n",
            "3",
            "--tau-range",
            "1:3",
            "--points",
            "5",
            "--grid-step",
            "0.002",
        ],
    ]));
    let curve = &v["curve"];
    assert_eq!(curve["tau_values"].as_array().unwrap().len(), 5);
    assert_eq!(curve["bound_values"].as_array().unwrap().len(), 5);
    assert!(curve["metadata"]["failures"].as_array().unwrap().is_empty());
    assert_eq!(curve["metadata"]["grid_step"], 0.002);
}

#[test]
fn split_band_gap_is_positive() {
    let v = json_ok(&join(&[
        &["gap"],
        SPLIT,
        &["--n", "3", "--tau", "7", "--phases", "90"],
    ]));
    let (b, e, g) = (
        v["bound"].as_f64().unwrap(),
        v["exact"].as_f64().unwrap(),
        v["gap"].as_f64().unwrap(),
    );
    assert!(g > 0.0);
    assert!(e <= b + v["cross_tol"].as_f64().unwrap());
    assert_eq!(g, b - e);
}

#[test]
fn exact_reports_a_feasible_witness() {
    let v = json_ok(&join(&[
        &["exact"],
        INTERVAL,
        &["--n", "3", "--tau", "1.5", "--phases", "36"],
    ]));
    let mass: f64 = ["mu", "nu"]
        .iter()
        .flat_map(|k| v["witness"][k].as_array().unwrap().clone())
        .map(|atom| atom[1].as_f64().unwrap())
        .sum();
    assert!((mass - 2.0).abs() <= 1e-6, "witness mass {mass}");
    assert_eq!(v["per_phase_values"].as_array().unwrap().len(), 36);
    assert!(v["failed_phases"].as_array().unwrap().is_empty());
}

#[test]
fn diagnose_passes_on_symmetric_band() {
    let v = json_ok(&join(&[
        &["diagnose"],
        INTERVAL,
        &["--n", "5", "--tau", "4.7"],
    ]));
    assert_eq!(v["all_passed"], true);
    let checks = v["report"]["checks"].as_array().unwrap();
    assert!(checks
        .iter()
        .any(|c| c["name"] == "omega_symmetry" && c["status"] == "pass"));
}

#[test]
fn refine_reports_stable_gap_for_split_band() {
    let v = json_ok(&join(&[
        &["refine"],
        SPLIT,
        &[
            "--n",
            "3",
            "--tau",
            "6.5",
            "--exact",
            "--grid-step",
            "0.001",
            "--phases",
            "90",
        ],
    ]));
    assert_eq!(v["gap_stable_to_3_figures"], true);
    assert_eq!(v["report"]["grid_levels"].as_array().unwrap().len(), 3);
}

#[test]
fn config_errors_exit_2_with_json() {
    let cases: [&[&str]; 5] = [
        &["bound", "--n", "3", "--tau", "1.5"],
        &["bound", "--band", "0.3:-0.3", "--n", "3", "--tau", "1.5"],
        &["bound", "--band", "nonsense", "--n", "3", "--tau", "1.5"],
        &[
            "bound", "--band", "-0.3:0.3", "--n", "3", "--tau", "1.5", "--format", "csv",
        ],
        &["frobnicate"],
    ];
    for args in cases {
        let (code, err) = json_err(args);
        assert_eq!(code, 2, "{args:?}");
        assert_eq!(err["kind"], "config", "{args:?}");
        assert_eq!(err["exit_code"], 2);
        assert!(!err["message"].as_str().unwrap().is_empty());
    }
}

#[test]
fn config_file_is_merged_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    std::fs::write(&path, r#"{"band": [[-0.3, 0.3]], "n": 3, "tau": 1.5}"#).unwrap();
    let p = path.to_str().unwrap();
    let from_file = json_ok(&["bound", "--config", p]);
    assert!((from_file["bound"].as_f64().unwrap() - 0.016087551446).abs() <= 1e-9);
    let overridden = json_ok(&["bound", "--config", p, "--tau", "2"]);
    assert_eq!(overridden["config"]["tau"], 2.0);
    assert!(overridden["bound"].as_f64().unwrap() <= 1e-8);

    std::fs::write(
        &path,
        r#"{"band": [[-0.3, 0.3]], "n": 3, "tau": 1.5, "colour": "red"}"#,
    )
    .unwrap();
    let (code, err) = json_err(&["bound", "--config", p]);
    assert_eq!(code, 2);
    assert_eq!(err["kind"], "config");
}

#[test]
fn output_flag_writes_file_instead_of_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bound.json");
    let out = covbound(&join(&[
        &["bound"],
        INTERVAL,
        &[
            "--n",
            "3",
            "--tau",
            "1.5",
            "--output",
            path.to_str().unwrap(),
        ],
    ]));
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    assert_eq!(v["command"], "bound");
}

#[test]
fn help_exits_cleanly() {
    let out = covbound(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("sweep"));
}
