use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command as Process;

use clap::Parser;
use fairalloc::config::{parse_config, PolicySpec};
use fairalloc::report::{OFFLINE_HEADER, REGRET_HEADER, SUMMARY_HEADER};
use fairalloc::CompletionSpec;
use fairalloc_cli::{run, Cli};

fn bundled(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
}

fn invoke(args: &[&str]) -> (Result<(), fairalloc_cli::CliError>, String) {
    let cli = Cli::try_parse_from(std::iter::once("fairalloc").chain(args.iter().copied())).unwrap();
    let mut out = Vec::new();
    let res = run(cli, &mut out);
    (res, String::from_utf8(out).unwrap())
}

/// Bundled config with the `experiment` block replaced.
fn variant(dir: &Path, experiment: &str, drop_v: bool) -> PathBuf {
    let text = fs::read_to_string(bundled("section5.cfg")).unwrap();
    let mut value: serde_json::Value = serde_json::from_str(&text).unwrap();
    value["experiment"] = serde_json::from_str(experiment).unwrap();
    if drop_v {
        value.as_object_mut().unwrap().remove("v");
    }
    let path = dir.join("variant.cfg");
    fs::write(&path, serde_json::to_string_pretty(&value).unwrap()).unwrap();
    path
}

#[test]
fn bundled_config_has_two_pareto_groups() {
    let cfg = parse_config(bundled("section5.cfg")).unwrap();
    let shapes: Vec<(f64, f64)> = cfg
        .env
        .groups
        .iter()
        .map(|g| match g.completion() {
            CompletionSpec::Pareto { scale, shape } => (*scale, *shape),
            other => panic!("unexpected {other:?}"),
        })
        .collect();
    assert_eq!(shapes, vec![(1.0, 1.2), (1.0, 1.4)]);
    assert_eq!(cfg.v, Some(20.0));
    assert!(cfg.env.utilities.iter().all(|u| u.weight() == 1.0));
    let sim = cfg.simulate.unwrap();
    assert_eq!(sim.trials, 1000);
    assert_eq!(sim.policy, PolicySpec::Olum);
}

#[test]
fn offline_prints_equal_shares() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = bundled("section5.cfg");
    let (res, out) = invoke(&[
        "offline",
        cfg.to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    res.unwrap();
    assert!(out.contains("t*") && out.contains("r*"));
    let csv = fs::read_to_string(dir.path().join("offline.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), OFFLINE_HEADER.join(","));
    for row in lines {
        let phi: f64 = row.split(',').nth(4).unwrap().parse().unwrap();
        assert!((phi - 0.5).abs() < 1e-12, "{row}");
    }
}

#[test]
fn simulate_oracle_writes_one_row_per_group() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = variant(
        dir.path(),
        r#"{"simulate": {"policy": "oracle_srp", "budget": 10000, "trials": 20}}"#,
        false,
    );
    let (res, _) = invoke(&[
        "simulate",
        cfg.to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    res.unwrap();
    let csv = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], SUMMARY_HEADER.join(","));
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("oracle_srp,1,10000,,20,group-1,"));
}

#[test]
fn regret_without_v_uses_budget_rule() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = variant(
        dir.path(),
        r#"{"regret": {"budgets": [100, 300, 1000, 3200], "trials": 8}}"#,
        true,
    );
    let (res, out) = invoke(&[
        "regret",
        cfg.to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    res.unwrap();
    assert!(out.contains("V = sqrt(B / ln B)"));
    let csv = fs::read_to_string(dir.path().join("regret.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], REGRET_HEADER.join(","));
    assert_eq!(lines.len(), 6);
    assert!(lines[5].starts_with("slope,,,,"));
    let v: f64 = lines[1].split(',').nth(1).unwrap().parse().unwrap();
    assert!((v - (100.0f64 / 100.0f64.ln()).sqrt()).abs() < 1e-12);
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = variant(
        dir.path(),
        r#"{"simulate": {"policy": "olum", "budget": 500, "trials": 40}}"#,
        false,
    );
    let mut bodies = Vec::new();
    for threads in ["1", "3"] {
        let out_dir = dir.path().join(threads);
        let (res, _) = invoke(&[
            "simulate",
            cfg.to_str().unwrap(),
            "--out-dir",
            out_dir.to_str().unwrap(),
            "--threads",
            threads,
            "--seed",
            "11",
        ]);
        res.unwrap();
        bodies.push(fs::read(out_dir.join("summary.csv")).unwrap());
    }
    assert_eq!(bodies[0], bodies[1]);
}

#[test]
fn moments_lists_every_group_and_deadline() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = bundled("section5.cfg");
    let (res, _) = invoke(&[
        "moments",
        cfg.to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    res.unwrap();
    let csv = fs::read_to_string(dir.path().join("moments.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 9);
}

fn exit_code(args: &[&str]) -> (i32, String) {
    let out = Process::new(env!("CARGO_BIN_EXE_fairalloc"))
        .args(args)
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let good = bundled("section5.cfg");
    assert_eq!(
        exit_code(&["offline", good.to_str().unwrap(), "--out-dir", out_dir]).0,
        0
    );

    let text = fs::read_to_string(&good).unwrap();
    let bad = dir.path().join("bad.cfg");
    fs::write(&bad, text.replacen("\"shape\": 1.2", "\"shape\": -1.2", 1)).unwrap();
    let (code, err) = exit_code(&["offline", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("groups[0].completion.pareto.shape"), "{err}");

    assert_eq!(exit_code(&["offline", "/nonexistent/x.cfg"]).0, 2);
    assert_eq!(
        exit_code(&["regret", good.to_str().unwrap(), "--out-dir", out_dir]).0,
        2
    );

    let zero = dir.path().join("zero.cfg");
    let silent = text
        .replace(
            "\"power_of_time\": {\"exponent\": 0.6}",
            "\"constant\": {\"value\": 0.0}",
        )
        .replace(
            "\"power_of_time\": {\"exponent\": 0.2}",
            "\"constant\": {\"value\": 0.0}",
        );
    fs::write(&zero, silent).unwrap();
    assert_eq!(
        exit_code(&["offline", zero.to_str().unwrap(), "--out-dir", out_dir]).0,
        3
    );
}
