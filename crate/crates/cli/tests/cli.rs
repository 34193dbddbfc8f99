use std::fs;
use std::process::Command;

use germlie_cli::{run, RunConfig, EXIT_PASS, EXIT_USAGE};

fn config(suite: &str, out: &std::path::Path) -> RunConfig {
    RunConfig {
        suite: suite.to_string(),
        seed: 7,
        trials: Some(3),
        r: 0.1,
        rho0: 1.0,
        degree: 12,
        bch_order: 8,
        steps: 64,
        dim: 2,
        out: out.to_path_buf(),
    }
}

#[test]
fn same_seed_gives_identical_reports() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for suite in ["lie-local", "lie-global", "complexify"] {
        let ra = run(&config(suite, a.path()));
        let rb = run(&config(suite, b.path()));
        assert_eq!(ra.exit_code, EXIT_PASS, "{}", ra.message);
        assert_eq!(rb.exit_code, EXIT_PASS, "{}", rb.message);
        for file in ["report.json", "summary.csv"] {
            let x = fs::read(a.path().join(file)).unwrap();
            let y = fs::read(b.path().join(file)).unwrap();
            assert_eq!(x, y, "{suite}/{file} differs");
        }
    }
}

#[test]
fn report_has_schema_and_criteria() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&config("lie-global", dir.path()));
    assert_eq!(out.exit_code, EXIT_PASS);
    let json: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(json["schema"], 1);
    assert_eq!(json["passed"], true);
    let ids: Vec<u64> = json["criteria"].as_array().unwrap().iter().map(|c| c["id"].as_u64().unwrap()).collect();
    assert_eq!(ids, vec![6, 7]);
    assert!(json["criteria"][0].get("elapsed_secs").is_none());
    let timings = fs::read_to_string(dir.path().join("timings.csv")).unwrap();
    assert_eq!(timings.lines().count(), 3);
}

#[test]
fn ratio_outside_range_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config("lie-local", dir.path());
    cfg.r = 0.2;
    let out = run(&cfg);
    assert_eq!(out.exit_code, EXIT_USAGE);
    assert!(!dir.path().join("report.json").exists());
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_germlie");
    let status = |args: &[&str]| {
        Command::new(bin)
            .args(args)
            .arg("--out")
            .arg(dir.path())
            .status()
            .unwrap()
            .code()
    };
    assert_eq!(status(&["run", "--suite", "nope"]), Some(2));
    assert_eq!(status(&["run", "--suite", "lie-global", "--r", "0.2"]), Some(2));
    assert_eq!(status(&["run", "--suite", "lie-global", "--trials", "2"]), Some(0));
    let bad_flag = Command::new(bin).args(["run", "--bogus"]).status().unwrap().code();
    assert_eq!(bad_flag, Some(2));
}
