use std::process::{Command, Output};

use lang_trotter::AverageReport;
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lang-trotter")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn trace_example() {
    assert_eq!(json(&["trace", "--p", "5", "--a", "1", "--b", "0"])["r"], 2);
    let plain = run(&["trace", "--p", "5", "--a", "-1", "--b", "0", "--format", "plain"]);
    assert!(String::from_utf8(plain.stdout).unwrap().lines().any(|l| l == "r=-2"));
}

#[test]
fn constants_example() {
    let v = json(&["constants", "--r", "0", "--truncation", "1000000"]);
    let value = v["value"].as_f64().unwrap();
    assert!((value - 12.0 / std::f64::consts::PI.powi(3)).abs() < 1e-6);
}

#[test]
fn verify_all_passes() {
    let out = run(&["verify-all", "--max-p", "61"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["passed"], true);
    assert!(v["checks"].as_array().unwrap().len() >= 10);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["trace", "--p", "5", "--a", "1", "--b", "0", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["average", "--x", "50", "--A", "0", "--B", "3", "--r", "1"]).status.code(), Some(2));
    assert_eq!(run(&["trace", "--p", "7", "--a", "0", "--b", "0"]).status.code(), Some(2));
    assert_eq!(run(&["classnum", "--disc", "-5"]).status.code(), Some(2));
}

#[test]
fn resource_errors_exit_3() {
    let out = run(&["average", "--x", "5000000000", "--A", "10", "--B", "10", "--r", "1"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn charcheck_reports_every_bound() {
    for q in ["3", "35", "101"] {
        let out = run(&["charcheck", "--q", q]);
        assert_eq!(out.status.code(), Some(0));
        let v: Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(v["passed"], true);
        assert!(v["polya_vinogradov"]["max_abs_sum"].as_f64() <= v["polya_vinogradov"]["bound"].as_f64());
    }
    assert_eq!(run(&["charcheck", "--q", "45"]).status.code(), Some(2));
}

#[test]
fn reports_round_trip() {
    for cmd in ["average", "moment", "census"] {
        let out = run(&[cmd, "--x", "60", "--A", "20", "--B", "20", "--r", "1", "--timing"]);
        assert!(out.status.success());
        let report = AverageReport::from_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
        assert!(report.timing.is_some());
        assert_eq!(report.config.x, 60);
        match cmd {
            "moment" => assert!(report.second_moment.is_some()),
            "census" => assert!(report.exceptional_count.is_some() && report.threshold.is_some()),
            _ => assert!(report.per_prime_rows.is_some()),
        }
    }
}

#[test]
fn threads_never_change_output() {
    for cmd in ["moment", "census"] {
        let args = |t: &'static str| [cmd, "--x", "80", "--A", "40", "--B", "30", "--r", "-1", "--threads", t];
        assert_eq!(run(&args("1")).stdout, run(&args("6")).stdout, "{cmd}");
    }
}

#[test]
fn csv_table_and_cache() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().to_str().unwrap();
    let args = ["average", "--x", "100", "--A", "30", "--B", "30", "--r", "2", "--format", "csv", "--cache-dir", cache];
    let cold = run(&args);
    let text = String::from_utf8(cold.stdout.clone()).unwrap();
    assert!(text.starts_with("p,N_r,H_rp,contrib\n5,"));
    // primes 3 < p <= 100
    assert_eq!(text.lines().count(), 1 + 23);
    assert!(dir.path().join("index.tsv").exists());
    assert_eq!(run(&args).stdout, cold.stdout);
}

#[test]
fn module_commands_emit_reports() {
    let v = json(&["classnum", "--disc", "-16"]);
    assert_eq!(v["H"], 2);
    let v = json(&["isoclasses", "--p", "13", "--r", "2"]);
    assert_eq!(v["class_count"], v["H"]);
    let v = json(&["distribution", "--p", "11", "--r", "0"]);
    assert_eq!(v["total"], 110);
    assert_eq!(v["membership"]["pairs"], 20);
    let v = json(&["boxcount", "--p", "13", "--r", "2", "--A", "13", "--B", "13"]);
    assert_eq!(v["agrees"], true);
    let v = json(&["lemma3", "--x", "1000", "--r", "1"]);
    assert!(v["ratio"].as_f64().unwrap() > 0.0);
}
