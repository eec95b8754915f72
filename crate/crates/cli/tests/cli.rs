use std::f64::consts::FRAC_PI_2;
use std::path::Path;
use std::process::{Command, Output};

use bendsta_core::tables::{read_metrics, MetricsReport};

const TRAP: [&str; 4] = ["--omega-hz", "1705", "--sdot0-mm-s", "20"];

fn bendsta(args: &[&str], out_dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bendsta"))
        .args(args)
        .arg("--out-dir")
        .arg(out_dir)
        .output()
        .expect("binary runs")
}

fn metrics(out_dir: &Path) -> MetricsReport {
    read_metrics(out_dir.join("metrics.toml")).unwrap()
}

fn value(report: &MetricsReport, name: &str) -> f64 {
    report.get(name).unwrap_or_else(|| panic!("missing metric {name}")).value
}

fn straight_profile(dir: &Path) -> String {
    let file = dir.join("straight.csv");
    std::fs::write(&file, "s_m,kappa_per_m\n0,0\n0.00002,0\n").unwrap();
    file.display().to_string()
}

#[test]
fn design_from_flags_matches_reference_bend() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["design"];
    args.extend(TRAP);
    args.extend(["--kappa-max-per-um", "0.22"]);
    let out = bendsta(&args, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = metrics(dir.path());
    assert!((value(&report, "s_f") - 16.6).abs() <= 0.03 * 16.6);
    assert!((value(&report, "total_time") - 0.88).abs() <= 0.03 * 0.88);
    for file in ["scenario.toml", "profile.csv", "design.toml", "path.csv", "adiabaticity.csv"] {
        assert!(dir.path().join(file).exists(), "{file} missing");
    }
}

#[test]
fn circular_design_has_quarter_circle_length() {
    let dir = tempfile::tempdir().unwrap();
    let out = bendsta(&["design", "--preset", "reference", "--radius-um", "10"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = metrics(dir.path());
    let length = FRAC_PI_2 * 10.0;
    assert!((value(&report, "s_f") - length).abs() < 1e-6 * length);
    // 20 mm/s is 20 um/ms
    assert!((value(&report, "total_time") - length / 20.0).abs() < 1e-6);
    assert!((value(&report, "R_eq") - 10.0).abs() < 1e-2);
}

#[test]
fn missing_design_flag_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["design"];
    args.extend(TRAP);
    let out = bendsta(&args, dir.path());
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    let record: serde_json::Value = serde_json::from_str(stderr.lines().last().unwrap()).unwrap();
    assert_eq!(record["status"], "error");
    assert_eq!(record["kind"], "usage");
    assert_eq!(record["exit_code"], 2);
    assert!(!dir.path().join("manifest.jsonl").exists());
}

#[test]
fn invalid_sample_count_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = bendsta(
        &["classical", "sweep", "--preset", "reference", "--samples", "1"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn missing_profile_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["classical", "run", "--profile", "does-not-exist.csv"];
    args.extend(TRAP);
    let out = bendsta(&args, dir.path());
    assert_eq!(out.status.code(), Some(5));
}

#[test]
fn straight_guide_trajectory_stays_on_axis() {
    let dir = tempfile::tempdir().unwrap();
    let profile = straight_profile(dir.path());
    let mut args = vec!["classical", "run", "--profile", &profile];
    args.extend(TRAP);
    let out = bendsta(&args, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut reader = csv::Reader::from_path(dir.path().join("trajectory.csv")).unwrap();
    let header = reader.headers().unwrap().clone();
    let y = header.iter().position(|h| h == "y_m").unwrap();
    let mut rows = 0;
    for record in reader.records() {
        let record = record.unwrap();
        assert_eq!(record[y].parse::<f64>().unwrap(), 0.0);
        rows += 1;
    }
    assert!(rows > 10);
}

#[test]
fn straight_guide_packet_is_not_excited() {
    let dir = tempfile::tempdir().unwrap();
    let profile = straight_profile(dir.path());
    let mut args = vec!["quantum", "run", "--profile", &profile, "--grid-ns", "512", "--grid-ny", "64"];
    args.extend(TRAP);
    let out = bendsta(&args, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = metrics(dir.path());
    assert!(value(&report, "nbar") <= 1e-6);
    assert!(value(&report, "fidelity") >= 1.0 - 1e-6);
}

#[test]
fn outputs_are_deterministic_and_runs_are_logged() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["classical", "sweep", "--preset", "reference", "--samples", "11"];
    let first = bendsta(&args, dir.path());
    assert!(first.status.success());
    let bytes = std::fs::read(dir.path().join("sweep.csv")).unwrap();
    let second = bendsta(&args, dir.path());
    assert!(second.status.success());
    assert_eq!(bytes, std::fs::read(dir.path().join("sweep.csv")).unwrap());

    let log = std::fs::read_to_string(dir.path().join("manifest.jsonl")).unwrap();
    let records: Vec<serde_json::Value> = log.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(records.len(), 2);
    assert_eq!(records[0]["command"], "classical sweep");
    assert_eq!(records[0]["scenario_sha256"], records[1]["scenario_sha256"]);
    assert_eq!(records[0]["artifacts"], serde_json::json!(["sweep.csv", "metrics.toml"]));
}

#[test]
fn reference_reproduction_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = bendsta(&["reproduce", "fig2"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(metrics(dir.path()).all_pass());
}
