//! End-to-end runs of the binary: exit codes, outputs and replay.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn tracelab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tracelab"))
        .args(args)
        .env("TRACELAB_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn json_file(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn verify_passes_and_writes_report_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("mt1.json");
    let o = tracelab(&["verify", "--claim", "mt1", "--trials", "50", "--seed", "7", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report = json_file(&out);
    assert_eq!(report["passed"], true);
    let first = &report["reports"][0];
    for key in ["claim", "verdict", "sides", "margin", "tolerance", "context"] {
        assert!(!first[key].is_null(), "missing {key}");
    }
    for key in ["seed", "dims", "weights", "n", "alphas", "function"] {
        assert!(!first["context"][key].is_null(), "missing context.{key}");
    }
    let manifest = json_file(&dir.path().join("mt1.json.manifest.json"));
    assert_eq!(manifest["exit_code"], 0);
    assert_eq!(manifest["config"]["master_seed"], 7);
    assert!(manifest["rng"].as_str().unwrap().contains("chacha20"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(tracelab(&["verify", "--claim", "nosuch"]).status.code(), Some(2));
    assert_eq!(tracelab(&["verify", "--claim", "mt1", "--functions", "nosuch"]).status.code(), Some(2));
    assert_eq!(tracelab(&["verify", "--claim", "mt1", "--dims", "5..2"]).status.code(), Some(2));
    assert_eq!(tracelab(&["verify", "--claim", "mt1", "--tuple-size", "1"]).status.code(), Some(2));
    assert_eq!(tracelab(&["verify", "--bogus-flag"]).status.code(), Some(2));
    assert_eq!(tracelab(&["identity", "--identity", "mo2", "--constraint", "none"]).status.code(), Some(2));
    assert_eq!(tracelab(&["counterexample", "--claim", "id1", "--trials", "0"]).status.code(), Some(2));
    assert_eq!(tracelab(&["--help"]).status.code(), Some(0));
}

#[test]
fn literal_probe_fails_with_context() {
    let o = tracelab(&["verify", "--claim", "tl-literal", "--functions", "power:1.5", "--trials", "20", "--detail", "failures"]);
    assert_eq!(o.status.code(), Some(1));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    let r = &report["reports"][0];
    assert_eq!(r["verdict"], "Violation");
    assert_eq!(r["context"]["function"], "power:1.5");
    assert_eq!(r["context"]["seed"].as_str().unwrap().len(), 64);
}

#[test]
fn probes_are_gated_only_on_request() {
    let base = ["verify", "--claim", "all", "--trials", "5", "--detail", "none"];
    assert_eq!(tracelab(&base).status.code(), Some(0));
    let mut with = base.to_vec();
    with.push("--include-probes");
    assert_eq!(tracelab(&with).status.code(), Some(1));
}

#[test]
fn csv_is_a_flat_projection() {
    let o = tracelab(&["verify", "--claim", "clarkson-p", "--p-values", "3", "--trials", "4", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let mut reader = csv::Reader::from_reader(o.stdout.as_slice());
    let headers = reader.headers().unwrap().clone();
    for h in ["claim", "verdict", "sides", "margin", "tolerance", "seed", "dims", "weights", "n", "alphas", "function"] {
        assert!(headers.iter().any(|x| x == h), "missing column {h}");
    }
    let rows: Vec<_> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 4);
    assert_eq!(&rows[0][0], "clarkson-p");
}

#[test]
fn config_file_uses_flag_names_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"claim": "tr1", "trials": 3, "seed": 11, "tuple-size": 4, "functions": ["power:3"]}"#).unwrap();
    let o = tracelab(&["verify", "--config", cfg.to_str().unwrap(), "--trials", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["config"]["trials"], 2);
    assert_eq!(report["config"]["master_seed"], 11);
    assert_eq!(report["reports"].as_array().unwrap().len(), 2);
    assert_eq!(report["reports"][0]["context"]["n"], 4);
    std::fs::write(&cfg, r#"{"claim": "tr1", "unknown": 1}"#).unwrap();
    assert_eq!(tracelab(&["verify", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn counterexample_and_identity_commands() {
    let o = tracelab(&["counterexample", "--claim", "tl-literal", "--reading", "concave", "--functions", "power:2"]);
    assert_eq!(o.status.code(), Some(0));
    let found: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(found["found"], true);
    assert_eq!(found["counterexample"]["dim"], 1);
    assert_eq!(found["counterexample"]["n"], 2);

    let o = tracelab(&["counterexample", "--claim", "id1", "--trials", "10", "--max-dim", "2", "--max-n", "3"]);
    assert_eq!(o.status.code(), Some(1));
    let o = tracelab(&["counterexample", "--claim", "id1", "--trials", "10", "--max-dim", "2", "--max-n", "3", "--expect", "none"]);
    assert_eq!(o.status.code(), Some(0));

    let o = tracelab(&["identity", "--identity", "ibk", "--trials", "200"]);
    assert_eq!(o.status.code(), Some(0));
    let o = tracelab(&["identity", "--identity", "id1", "--tuple-size", "1", "--trials", "20"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["summary"]["max_relative_residual"], 0.0);
}

#[test]
fn selftest_catches_flipped_claims() {
    let o = tracelab(&["selftest", "--claim", "mt1,clarkson-p", "--functions", "power:4", "--p-values", "2,4"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let outcomes: Vec<(&str, &str)> = v["entries"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| (e["variant"].as_str().unwrap(), e["outcome"].as_str().unwrap()))
        .collect();
    assert_eq!(outcomes, [("power:4", "detected"), ("p=2.0", "not-applicable"), ("p=4.0", "detected")]);
}
