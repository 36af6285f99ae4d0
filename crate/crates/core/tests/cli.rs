mod common;

use std::fs;
use std::process::Command;

use serde_json::Value;

#[test]
fn fig2_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = common::qst(&["fig2", "--n-range", "2:6", "--grid", "400"], dir.path());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let csv = fs::read_to_string(dir.path().join("fig2.csv")).unwrap();
    let body: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body[0], "n,max_eta1,tau_opt");
    assert_eq!(body.len(), 1 + 5);
    assert!(csv.lines().any(|l| l.starts_with("# config ")));

    let m: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("fig2_manifest.json")).unwrap())
            .unwrap();
    assert_eq!(m["experiment"], "fig2");
    assert_eq!(m["config"]["grid"], 400);
    assert_eq!(m["files"][0], "fig2.csv");
    assert_eq!(m["passed"], true);
    assert!(m["wall_clock_s"].as_f64().unwrap() >= 0.0);
    assert!(m["crate_version"].is_string());
}

#[test]
fn environment_sets_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_qst"))
        .args(["fig2", "--n", "3", "--grid", "200"])
        .env("QST_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("fig2.csv").exists());
}

#[test]
fn example5_reports_both_unit_conventions() {
    let dir = tempfile::tempdir().unwrap();
    let out = common::qst(&["example5", "--grid", "1000"], dir.path());
    assert!(out.status.success());
    let m: Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("example5_manifest.json")).unwrap(),
    )
    .unwrap();
    let s = &m["summary"];
    let h = s["full_decode_time_ns"].as_f64().unwrap();
    let hbar = s["alternate_full_decode_time_ns"].as_f64().unwrap();
    assert!((h / hbar - std::f64::consts::TAU).abs() < 1e-9);
    assert_eq!(s["convention"], "h");
    let csv = fs::read_to_string(dir.path().join("example5.csv")).unwrap();
    assert!(csv.contains("step,tau,t,t_ns,eta,cumulative_eta"));
}

#[test]
fn sweep_rows_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = common::qst(
        &[
            "sweep", "--n", "5", "--seeds", "6", "--steps", "15", "--grid", "300", "--delta", "0.2",
        ],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(rows.lines().filter(|l| !l.starts_with('#')).count(), 1 + 6);
    let summary = fs::read_to_string(dir.path().join("sweep_summary.csv")).unwrap();
    assert!(summary.contains("quantity,mean,std,count"));
    assert!(summary.lines().any(|l| l.starts_with("eta1,")));
    let m: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("sweep_manifest.json")).unwrap())
            .unwrap();
    let seeds: Vec<u64> = serde_json::from_value(m["seeds"].clone()).unwrap();
    assert_eq!(seeds, vec![1, 2, 3, 4, 5, 6]);
}

#[test]
fn different_seeds_differ() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = [
        "sweep", "--n", "5", "--seeds", "3", "--steps", "10", "--grid", "300",
    ];
    common::qst(&[&args[..], &["--seed", "1"]].concat(), a.path());
    common::qst(&[&args[..], &["--seed", "2"]].concat(), b.path());
    assert_ne!(common::csv_files(a.path()), common::csv_files(b.path()));
}

#[test]
fn verify_exits_zero_when_checks_hold() {
    let dir = tempfile::tempdir().unwrap();
    let out = common::qst(&["verify", "--n-range", "2:4", "--seeds", "5"], dir.path());
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("verify.csv")).unwrap();
    assert!(!csv.contains(",false"));
}

#[test]
fn invalid_arguments_fail() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["sweep", "--delta", "2"][..],
        &["fig2", "--n", "1"][..],
        &["fig3", "--grid", "5"][..],
        &["nonsense"][..],
    ] {
        let out = common::qst(args, dir.path());
        assert!(!out.status.success(), "{args:?} should fail");
    }
}
