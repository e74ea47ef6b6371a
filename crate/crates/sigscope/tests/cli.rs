// Copyright 2026 The sigscope Authors
// SPDX-License-Identifier: Apache-2.0

use std::{fs, process::Command};

use serde_json::Value;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn sigscope(args: &[&str]) -> Run {
    sigscope_env(args, None)
}

fn sigscope_env(args: &[&str], threads: Option<&str>) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_sigscope"));
    cmd.args(args);
    match threads {
        Some(n) => cmd.env("SIGSCOPE_THREADS", n),
        None => cmd.env_remove("SIGSCOPE_THREADS"),
    };
    let out = cmd.output().expect("binary runs");
    Run {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn json(run: &Run) -> Value {
    serde_json::from_str(&run.stdout).unwrap_or_else(|e| panic!("{e}: {}", run.stdout))
}

fn csv_column(text: &str, name: &str) -> Vec<f64> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let idx = rdr.headers().unwrap().iter().position(|h| h == name).unwrap();
    rdr.records().map(|r| r.unwrap()[idx].parse().unwrap()).collect()
}

#[test]
fn estimate_line_is_exact() {
    let run = sigscope(&["estimate", "--scenario", "line", "--depth", "16", "--lambdas", "geometric:1:2:12"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let v = json(&run);
    assert_eq!(v["report"]["headline_lower"].as_f64(), Some(1.0));
    assert_eq!(v["report"]["signature_estimates"].as_array().unwrap().len(), 16);
    assert_eq!(v["report"]["certified"], Value::Bool(true));
}

#[test]
fn estimate_treelike_is_zero() {
    let run = sigscope(&["estimate", "--scenario", "treelike"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert_eq!(json(&run)["report"]["headline_lower"].as_f64(), Some(0.0));
}

#[test]
fn estimate_staircase_builds_a_cover() {
    let run = sigscope(&["estimate", "--scenario", "staircase"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let v = json(&run);
    assert_eq!(v["cover"]["v_points"].as_array().unwrap().len(), 4);
    let headline = v["report"]["headline_lower"].as_f64().unwrap();
    assert!(headline >= 0.99 * 2.02, "{headline}");
}

#[test]
fn estimate_csv_writes_both_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let run = sigscope(&["estimate", "--scenario", "l_shape", "--depth", "6", "--format", "csv", "--out", out]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let sig = fs::read_to_string(dir.path().join("signature.csv")).unwrap();
    assert!(sig.starts_with("n,normalized_hs,normalized_rank_one,max_abs_coefficient\n"));
    assert_eq!(sig.lines().count(), 7);
    let dev = fs::read_to_string(dir.path().join("estimate.csv")).unwrap();
    assert_eq!(csv_column(&dev, "lambda").len(), 12);
}

#[test]
fn missing_file_exits_one() {
    let run = sigscope(&["estimate", "--scenario", "/nonexistent/scenario.json"]);
    assert_eq!(run.code, 1);
    assert!(run.stderr.contains("not found"), "{}", run.stderr);
}

#[test]
fn malformed_scenario_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, r#"{"name": "bad", "kind": "polygon", "vertex": [[0, 0], [1, 0]]}"#).unwrap();
    let run = sigscope(&["estimate", "--scenario", path.to_str().unwrap()]);
    assert_eq!(run.code, 1);
    assert!(run.stderr.contains("vertices"), "{}", run.stderr);

    fs::write(&path, r#"{"name": "bad", "kind": "singular_cusp", "length": 2, "r": 2, "a": 0, "c": 0.5, "resolution": 10}"#)
        .unwrap();
    let run = sigscope(&["estimate", "--scenario", path.to_str().unwrap()]);
    assert_eq!(run.code, 1);
    assert!(run.stderr.contains("`r`"), "{}", run.stderr);
}

#[test]
fn bad_schedule_exits_one() {
    let run = sigscope(&["develop", "--scenario", "line", "--lambdas", "geometric:1:2"]);
    assert_eq!(run.code, 1);
    assert!(run.stderr.contains("lambdas"));
}

#[test]
fn develop_reports_the_curve() {
    let run = sigscope(&["develop", "--scenario", "l_shape", "--lambdas", "1,10,100", "--format", "csv"]);
    assert_eq!(run.code, 0);
    assert!(run.stdout.starts_with("lambda,log_norm,log_norm_over_lambda\n"));
    let values = csv_column(&run.stdout, "log_norm_over_lambda");
    assert!(values.windows(2).all(|w| w[0] < w[1]) && values[2] < 2.0);
}

#[test]
fn aligned_line_has_constant_two_phi() {
    let run = sigscope(&["dynamics", "--scenario", "line", "--format", "csv"]);
    assert_eq!(run.code, 0);
    let two_phi = csv_column(&run.stdout, "two_phi");
    assert_eq!(two_phi.len(), 1001);
    assert!(two_phi.iter().all(|v| *v == two_phi[0]));
}

#[test]
fn cusp_trace_matches_golden() {
    let run = sigscope(&[
        "dynamics", "--scenario", "cusp_c050", "--lambdas", "100", "--format", "csv", "--samples", "101",
    ]);
    assert_eq!(run.code, 0);
    let golden = include_str!("golden/cusp_c050_lambda100.csv");
    for col in ["t", "alpha", "two_phi", "psi", "cumulative_I"] {
        let got = csv_column(&run.stdout, col);
        let want = csv_column(golden, col);
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() <= 1e-9 * w.abs().max(1.0), "{col}: {g} vs {w}");
        }
    }
    // the π-jump at L/2 followed by recapture
    let psi = csv_column(&run.stdout, "psi");
    assert!(psi[51] > 3.0, "{}", psi[51]);
    assert!(psi[60..].iter().all(|p| p.abs() < 0.01));
}

#[test]
fn bad_phi0_policy_exits_one() {
    let run = sigscope(&["dynamics", "--scenario", "line", "--phi0", "sideways"]);
    assert_eq!(run.code, 1);
    assert!(run.stderr.contains("phi0"));
}

#[test]
fn cattim_suite_has_no_fails() {
    let run = sigscope(&["lemmas", "--id", "CatTim", "--count", "1000", "--seed", "0x5EED"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let v = json(&run);
    let s = &v[0];
    assert_eq!(s["fail"].as_u64(), Some(0));
    assert_eq!(s["pass"].as_u64().unwrap() + s["skip"].as_u64().unwrap(), 1000);
}

#[test]
fn all_suites_summarize() {
    let run = sigscope(&["lemmas", "--id", "all", "--count", "30"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let v = json(&run);
    assert_eq!(v.as_array().unwrap().len(), 8);
}

#[test]
fn unknown_lemma_exits_one() {
    let run = sigscope(&["lemmas", "--id", "Nope"]);
    assert_eq!(run.code, 1);
}

#[test]
fn verdict_files_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = |dir: &str| vec!["lemmas", "--id", "all", "--count", "50", "--seed", "17", "--out"]
        .into_iter()
        .map(String::from)
        .chain([dir.to_string()])
        .collect::<Vec<_>>();
    let run_a = sigscope_env(&args(a.path().to_str().unwrap()).iter().map(String::as_str).collect::<Vec<_>>(), None);
    let run_b = sigscope_env(&args(b.path().to_str().unwrap()).iter().map(String::as_str).collect::<Vec<_>>(), Some("1"));
    assert_eq!(run_a.code, 0);
    assert_eq!(run_b.code, 0);
    let va = fs::read(a.path().join("verdicts.json")).unwrap();
    let vb = fs::read(b.path().join("verdicts.json")).unwrap();
    assert!(!va.is_empty());
    assert_eq!(va, vb);
}

#[test]
fn bad_thread_count_exits_one() {
    let run = sigscope_env(&["scenarios"], Some("zero"));
    assert_eq!(run.code, 1);
    assert!(run.stderr.contains("SIGSCOPE_THREADS"));
}

#[test]
fn scenarios_list_show_and_export() {
    let run = sigscope(&["scenarios"]);
    assert_eq!(run.code, 0);
    assert_eq!(run.stdout.lines().count(), 9);
    let run = sigscope(&["scenarios", "l_shape"]);
    assert_eq!(json(&run)["kind"], Value::String("polygon".into()));
    let dir = tempfile::tempdir().unwrap();
    let run = sigscope(&["scenarios", "--export", dir.path().to_str().unwrap()]);
    assert_eq!(run.code, 0);
    // an exported file loads by path
    let path = dir.path().join("treelike.json");
    let run = sigscope(&["estimate", "--scenario", path.to_str().unwrap(), "--depth", "4"]);
    assert_eq!(run.code, 0);
    assert!(sigscope(&["scenarios", "nope"]).code == 1);
}
