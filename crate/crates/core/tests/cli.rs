mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use adaquery::adapter::mock::MockSpec;
use adaquery::campaign::METRICS_HEADER;
use adaquery::feature::Catalog;

fn adaquery(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adaquery"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn run(target: &str, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "run",
        "--target",
        target,
        "--out",
        out.to_str().unwrap(),
        "--interval-i",
        "1000",
    ];
    args.extend_from_slice(extra);
    adaquery(&args)
}

#[test]
fn clean_target_exits_zero_and_writes_metrics() {
    let c = Catalog::default_catalog();
    let dir = tempfile::tempdir().unwrap();
    let target = common::mock_target(dir.path(), "clean.spec", &MockSpec::full(&c), &c);
    let out = dir.path().join("out");
    let stats = dir.path().join("stats.tsv");
    let o = run(
        &target,
        &out,
        &[
            "--budget",
            "3000",
            "--stats",
            stats.to_str().unwrap(),
            "--oracle",
            "both",
        ],
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let metrics = fs::read_to_string(out.join("metrics.tsv")).unwrap();
    let mut lines = metrics.lines();
    assert_eq!(lines.next(), Some(METRICS_HEADER));
    assert_eq!(lines.count(), 3);

    let o = adaquery(&["stats", "--stats", stats.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(
        text.lines()
            .any(|l| l.starts_with("SELECT\t") && l.ends_with("SUPPORTED")),
        "{text}"
    );
}

#[test]
fn bugs_exit_one_and_recheck_replays_them() {
    let c = Catalog::default_catalog();
    let dir = tempfile::tempdir().unwrap();
    let mut spec = MockSpec::full(&c);
    spec.bugs = common::three_bugs(&c);
    let target = common::mock_target(dir.path(), "buggy.spec", &spec, &c);
    let out = dir.path().join("out");
    let o = run(&target, &out, &["--budget", "5000", "--seed", "3"]);
    assert_eq!(
        o.status.code(),
        Some(1),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(out.join("bugs/bug-0001/reproduce.sql").is_file());

    let o = adaquery(&[
        "recheck",
        "--out",
        out.to_str().unwrap(),
        "--target",
        &target,
    ]);
    assert_eq!(o.status.code(), Some(1));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(
        text.lines()
            .filter(|l| l.starts_with("bug-"))
            .all(|l| l.ends_with("\tfail")),
        "{text}"
    );

    // Once the engine is fixed, the same reports pass.
    let fixed = common::mock_target(dir.path(), "fixed.spec", &MockSpec::full(&c), &c);
    let o = adaquery(&[
        "recheck",
        "--out",
        out.to_str().unwrap(),
        "--target",
        &fixed,
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8(o.stdout).unwrap().contains("0 of "));
}

#[test]
fn unusable_target_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run("nosuch:thing", &out, &["--budget", "10"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run("mock:/nonexistent/spec", &out, &["--budget", "10"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn budget_or_duration_is_required() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("sqlite::memory:", &dir.path().join("out"), &[]);
    assert!(!o.status.success());
}
