//! End-to-end tests of the `etdgt` binary: subcommands, exit codes, file
//! outputs, and byte-level determinism.

use std::path::Path;
use std::process::{Command, Output};

fn etdgt(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_etdgt"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("read {path:?}: {e}"))
}

#[test]
fn run_writes_traces_summary_and_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let out = etdgt(
        &[
            "run",
            "--scenario",
            "case1",
            "--alg",
            "etdgt",
            "--alg",
            "ddgt",
            "-K",
            "200",
            "--out",
            "out",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let base = dir.path().join("out");
    for file in ["case1_etdgt.csv", "case1_ddgt.csv", "case1_summary.json", "case1_oracle.json"] {
        assert!(base.join(file).exists(), "missing {file}");
    }
    let summary: serde_json::Value = serde_json::from_str(&read(&base.join("case1_summary.json"))).unwrap();
    assert!(summary["comm_ratio_events"].as_f64().unwrap() <= 1.0);
    assert!(summary["bounds"]["alpha_contraction"].as_f64().unwrap() > 0.0);
    assert_eq!(summary["runs"]["etdgt"]["k"].as_u64().unwrap(), 200);
    let csv = read(&base.join("case1_etdgt.csv"));
    assert!(csv.starts_with(
        "k,consensus_error,tracking_error,grad_norm,primal_err,primal_residual,supply_gap,comm_w,comm_s\n"
    ));
    assert_eq!(csv.lines().count(), 202);
}

#[test]
fn identical_invocations_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "run", "--scenario", "case2", "--alg", "etdgt", "-K", "150", "--out",
    ];
    let a = etdgt(&[&args[..], &["a"]].concat(), dir.path());
    let b = etdgt(&[&args[..], &["b"]].concat(), dir.path());
    assert!(a.status.success() && b.status.success());
    assert_eq!(
        read(&dir.path().join("a/case2_etdgt.csv")),
        read(&dir.path().join("b/case2_etdgt.csv"))
    );
    assert_eq!(
        read(&dir.path().join("a/case2_summary.json")),
        read(&dir.path().join("b/case2_summary.json"))
    );
}

#[test]
fn zero_threshold_trace_matches_periodic_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = etdgt(
        &[
            "run",
            "--scenario",
            "case1",
            "--alg",
            "etdgt",
            "--alg",
            "ddgt",
            "--threshold-E",
            "0",
            "-K",
            "120",
            "--out",
            "out",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let base = dir.path().join("out");
    assert_eq!(
        read(&base.join("case1_etdgt.csv")),
        read(&base.join("case1_ddgt.csv"))
    );
}

#[test]
fn malformed_scenario_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.json"), "{ not json").unwrap();
    let out = etdgt(&["run", "--scenario", "bad.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("parse"));
}

#[test]
fn infeasible_scenario_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let mut scenario: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(
            Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/case1.json"),
        )
        .unwrap(),
    )
    .unwrap();
    scenario["agents"][3]["demand"] = serde_json::json!(1.0e6);
    std::fs::write(
        dir.path().join("infeasible.json"),
        scenario.to_string(),
    )
    .unwrap();
    let out = etdgt(&["run", "--scenario", "infeasible.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Slater"));
}

#[test]
fn bounds_prints_every_constant_family() {
    let dir = tempfile::tempdir().unwrap();
    let out = etdgt(&["bounds", "--scenario", "case1"], dir.path());
    assert!(out.status.success());
    let report: serde_json::Value =
        serde_json::from_slice(&out.stdout).expect("bounds output is JSON");
    assert_eq!(report["c"].as_array().unwrap().len(), 6);
    assert_eq!(report["b"].as_array().unwrap().len(), 4);
    assert_eq!(report["d"].as_array().unwrap().len(), 13);
    assert_eq!(report["h"].as_array().unwrap().len(), 8);
    for key in [
        "sigma_R",
        "sigma_C",
        "delta_RC",
        "delta_CR",
        "delta_2R",
        "delta_2C",
        "pi_CT_pi_R",
        "Psi_lower",
        "lambda_P2",
        "k0",
        "alpha_contraction",
        "alpha_sublinear",
        "gamma",
        "alpha_linear",
        "lambda_P3",
        "spectral_gap_P3",
        "det_I_minus_P",
        "trigger_admissible",
        "z0_norm",
    ] {
        assert!(report.get(key).is_some(), "missing {key}");
    }
    assert!(report["alpha_sublinear"].as_f64().unwrap() > 0.0);
    assert!(report["gamma"].as_f64().unwrap() > 0.0);
}

#[test]
fn oracle_subcommand_prints_solution() {
    let dir = tempfile::tempdir().unwrap();
    let out = etdgt(&["oracle", "--scenario", "case1", "--out", "o"], dir.path());
    assert!(out.status.success());
    let sol: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for key in ["W_star", "x_star", "f_star", "kkt_residual"] {
        assert!(sol.get(key).is_some(), "missing {key}");
    }
    let w1 = sol["W_star"][0][0].as_f64().unwrap();
    assert!((w1 - 76.7398).abs() < 1e-3);
    assert!(dir.path().join("o/case1_oracle.json").exists());
}

#[test]
fn gen_is_deterministic_and_loadable() {
    let dir = tempfile::tempdir().unwrap();
    let a = etdgt(
        &["gen", "--n", "30", "--seed", "5", "--out", "a.json"],
        dir.path(),
    );
    let b = etdgt(
        &["gen", "--n", "30", "--seed", "5", "--out", "b.json"],
        dir.path(),
    );
    assert!(a.status.success() && b.status.success());
    assert_eq!(read(&dir.path().join("a.json")), read(&dir.path().join("b.json")));
    // Generated file runs end to end.
    let out = etdgt(
        &["run", "--scenario", "a.json", "--alg", "etdgt", "-K", "50", "--out", "out"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("out/gen_n30_seed5_etdgt.csv").exists());
}

#[test]
fn unknown_scenario_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = etdgt(&["run", "--scenario", "nope"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}
