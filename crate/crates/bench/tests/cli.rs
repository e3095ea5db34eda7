use std::path::Path;
use std::process::{Command, Output};

use sparsefool_bench::{read_report, EvalReport};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sparsefool")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn train_model(dir: &Path) -> String {
    let model = dir.join("m.bin").display().to_string();
    let o = run(&["train", "--out", &model, "--epochs", "3"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    model
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(code(&run(&["attack", "--no-such-flag"])), 1);
    assert_eq!(code(&run(&["frobnicate"])), 1);
    assert_eq!(code(&run(&["attack", "--format", "xml", "--limit", "1"])), 1);
    assert_eq!(code(&run(&["attack", "--lambda", "0.5", "--limit", "1"])), 1);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn format_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let junk = dir.path().join("junk.bin");
    std::fs::write(&junk, b"not a model").unwrap();
    assert_eq!(code(&run(&["attack", "--model", junk.to_str().unwrap()])), 2);
    let empty = dir.path().display().to_string();
    assert_eq!(code(&run(&["attack", "--data", &empty])), 2);
}

#[test]
fn divergence_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.bin").display().to_string();
    assert_eq!(code(&run(&["train", "--out", &out, "--learning-rate", "1e300", "--epochs", "2"])), 3);
}

#[test]
fn attack_then_report_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let model = train_model(dir.path());
    let json = dir.path().join("r.json");
    let o = run(&["attack", "--model", &model, "--limit", "20", "--out", json.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r: EvalReport = read_report(&json).unwrap();
    assert_eq!(r.per_sample.len(), 20);
    assert_eq!(r.config_echo.lambda, Some(1.0));

    let o = run(&["report", "--in", json.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("fooling_rate,"));
    assert_eq!(text.lines().filter(|l| l.chars().next().is_some_and(|c| c.is_ascii_digit())).count(), 20);
}

#[test]
fn delta_in_pixel_units_is_converted() {
    let dir = tempfile::tempdir().unwrap();
    let model = train_model(dir.path());
    let o = run(&["attack", "--model", &model, "--limit", "5", "--delta255", "51"]);
    assert_eq!(code(&o), 0);
    let r: EvalReport = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r.config_echo.delta, Some(0.2));
    assert_eq!(code(&run(&["attack", "--model", &model, "--delta", "0.1", "--delta255", "3"])), 1);
}

#[test]
fn every_subcommand_runs_on_synthetic_data() {
    let data = "synth:n=30,classes=3,dim=6,margin=1,seed=2";
    for args in [
        vec!["attack", "--data", data],
        vec!["clipfail", "--data", data, "--format", "csv"],
        vec!["sweep-lambda", "--data", data, "--lambdas", "1,2"],
        vec!["sweep-delta", "--data", data, "--deltas", "0.5,8", "--format", "csv"],
        vec!["baseline", "--data", data, "--budget", "2"],
        vec!["transfer", "--data", data, "--limit", "10"],
    ] {
        let o = run(&args);
        assert_eq!(code(&o), 0, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!o.stdout.is_empty());
    }
}
