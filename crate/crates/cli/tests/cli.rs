use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn lab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cheeger-lab"))
        .current_dir(dir)
        .env_remove("CHEEGER_LAB_WORKERS")
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn sample_build_solve_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let s = lab(d, &["sample", "--manifold", "circle", "--n", "300", "--seed", "5", "--out", "c.csv"]);
    assert!(s.status.success());
    let meta: Value = serde_json::from_str(&std::fs::read_to_string(d.join("c.json")).unwrap()).unwrap();
    assert_eq!(meta["n"], 300);
    assert_eq!(meta["seed"], 5);
    assert_eq!(meta["manifold"], "circle");
    let csv = std::fs::read_to_string(d.join("c.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("i,x0,x1"));
    assert_eq!(csv.lines().count(), 301);

    assert!(lab(d, &["build-graph", "--cloud", "c.csv", "--epsilon", "0.1", "--out", "g.csv"]).status.success());
    let gmeta: Value = serde_json::from_str(&std::fs::read_to_string(d.join("g.json")).unwrap()).unwrap();
    assert_eq!(gmeta["epsilon"], 0.1);
    assert_eq!(gmeta["cloud_ref"], "c.csv");
    for line in std::fs::read_to_string(d.join("g.csv")).unwrap().lines().skip(1) {
        let (i, j) = line.split_once(',').unwrap();
        assert!(i.parse::<usize>().unwrap() < j.parse::<usize>().unwrap());
    }

    let arc = json(&lab(d, &["solve", "--graph", "g.csv", "--method", "arc-sweep"]));
    assert_eq!(arc["method"], "arc_sweep");
    assert_eq!(arc["certificate"], "family_optimum");
    let pipe = json(&lab(d, &["solve", "--graph", "g.csv"]));
    assert_eq!(pipe["method"], "pipeline");
    assert!(pipe["eigen_residual"].is_number());
    for key in ["subset", "objective", "gtv", "balance", "elapsed_sec"] {
        assert!(!pipe[key].is_null(), "{key}");
    }
    assert!(pipe["objective"].as_f64().unwrap() <= arc["objective"].as_f64().unwrap() + 1e-12);
    assert!(pipe["subset"].as_array().unwrap().contains(&Value::from(0)));
}

#[test]
fn exact_solver_refuses_large_graphs_at_runtime() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    lab(d, &["sample", "--manifold", "flat_torus_2", "--n", "40", "--out", "c.csv"]);
    lab(d, &["build-graph", "--cloud", "c.csv", "--epsilon", "0.2", "--out", "g.csv"]);
    let out = lab(d, &["solve", "--graph", "g.csv", "--method", "exact"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(lab(d, &["sample", "--manifold", "klein", "--n", "10"]).status.code(), Some(2));
    assert_eq!(lab(d, &["frobnicate"]).status.code(), Some(2));
    std::fs::write(d.join("bad.json"), "{\n  \"manifold\": \"circle\"\n}").unwrap();
    let out = lab(d, &["validate", "bad.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n_list required"));
    std::fs::write(d.join("eps.json"), r#"{"manifold": "circle", "n_list": [8, 500], "schedule": {"c": 2, "exponent": 0.5}}"#)
        .unwrap();
    let out = lab(d, &["validate", "eps.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("epsilon(8)"));
    assert_eq!(lab(d, &["validate", "missing.json"]).status.code(), Some(2));
}

#[test]
fn validate_echoes_resolved_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("c.json"), r#"{"manifold": "sphere_2", "n_list": [1000]}"#).unwrap();
    let v = json(&lab(d, &["validate", "c.json"]));
    assert_eq!(v["exponents"]["k_epsilon"], 0.3);
    assert_eq!(v["schedule"]["kind"], "power");
    assert_eq!(v["trials"], 1);
    assert_eq!(v["solver"], "pipeline");
    assert_eq!(v["record_timings"], false);
}

#[test]
fn converge_plot_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let args = |out: &'static str, workers: &'static str| {
        vec![
            "converge", "--manifold", "circle", "--n", "100,200,400", "--trials", "5", "--epsilon-c", "2",
            "--epsilon-exponent", "0.5", "--seed", "3", "--workers", workers, "--out", out,
        ]
    };
    let a = json(&lab(d, &args("a", "1")));
    assert_eq!(a["records"], 15);
    assert!(a["abs_error"]["slope"].is_number());
    assert!(a["transport"].as_str().unwrap().contains("nearest-sample"));
    let b = json(&lab(d, &args("b", "3")));
    assert_eq!(a["digest"], b["digest"]);
    let sa = std::fs::read(d.join("a/summary.csv")).unwrap();
    assert_eq!(sa, std::fs::read(d.join("b/summary.csv")).unwrap());
    assert_eq!(std::fs::read_dir(d.join("a/trials")).unwrap().count(), 15);
    assert!(d.join("a/rates.json").exists() && d.join("a/failures.json").exists());

    let p = json(&lab(d, &["plot", "--input", "a/summary.csv", "--kind", "cut-error"]));
    assert_eq!(p["rows"], 3);
    assert!(d.join("a/cut_error.tsv").exists() && d.join("a/cut_error.svg").exists());
    std::fs::write(d.join("thin.csv"), "n,epsilon\n100,0.2\n").unwrap();
    assert_eq!(lab(d, &["plot", "--input", "thin.csv", "--kind", "rate-loglog"]).status.code(), Some(2));
}

#[test]
fn workers_env_var_is_honoured() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_cheeger-lab"))
        .current_dir(dir.path())
        .env("CHEEGER_LAB_WORKERS", "zero")
        .args(["sample", "--manifold", "circle", "--n", "10"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_cheeger-lab"))
        .current_dir(dir.path())
        .env("CHEEGER_LAB_WORKERS", "2")
        .args(["sample", "--manifold", "circle", "--n", "10"])
        .output()
        .unwrap();
    assert!(out.status.success());
}

#[test]
fn ustat_and_nonlocal_reports() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let u = lab(d, &["ustat", "--manifold", "circle", "--n", "200,400", "--trials", "6", "--epsilon-c", "2", "--out", "u.json"]);
    assert!(u.status.success() && u.stdout.is_empty());
    let report: Value = serde_json::from_str(&std::fs::read_to_string(d.join("u.json")).unwrap()).unwrap();
    assert_eq!(report["rows"].as_array().unwrap().len(), 2);
    assert_eq!(report["total_variation"], 2.0);
    let p = json(&lab(d, &["plot", "--input", "u.json", "--kind", "concentration"]));
    assert_eq!(p["rows"], 2);

    let b = json(&lab(d, &["nonlocal-check", "--manifold", "circle", "--check", "bias", "--h", "0.05,0.1"]));
    assert_eq!(b["rows"].as_array().unwrap().len(), 2);
    let f = json(&lab(d, &["nonlocal-check", "--manifold", "circle", "--check", "functional-form"]));
    assert_eq!(f["pass"], true);
    let too_wide = lab(d, &["nonlocal-check", "--manifold", "circle", "--check", "bias", "--h", "0.9"]);
    assert_eq!(too_wide.status.code(), Some(2));
}
