use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use latin_mate::latin::{verify_latin, verify_orthogonal, LatinRectangle};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_latin-mate"))
        .args(args)
        .output()
        .unwrap()
}

fn path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn help_and_bad_arguments() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["gen", "--n", "3", "--m", "5"]).status.code(), Some(1));
    assert_eq!(run(&["mate", "/nonexistent/j.txt"]).status.code(), Some(1));
}

#[test]
fn generate_mate_and_verify() {
    let dir = tempfile::tempdir().unwrap();
    let j = path(dir.path(), "j.txt");
    let l = path(dir.path(), "l.txt");
    assert!(run(&["gen", "--n", "12", "--m", "3", "--seed", "1", "--out", s(&j)]).status.success());
    let out = run(&["mate", s(&j), "--algorithm", "hall", "--seed", "2", "--out", s(&l)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let jr = LatinRectangle::parse(&fs::read_to_string(&j).unwrap()).unwrap();
    let lr = LatinRectangle::parse(&fs::read_to_string(&l).unwrap()).unwrap();
    assert!(verify_latin(&lr).ok && verify_orthogonal(&lr, &jr).unwrap().ok);

    let v = run(&["verify", s(&j), s(&l)]);
    assert_eq!(v.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&v.stdout).trim(), "ok");
}

#[test]
fn verify_reports_violations_with_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let j = path(dir.path(), "j.txt");
    let l = path(dir.path(), "l.txt");
    fs::write(&j, "0 1 2\n1 2 0\n").unwrap();
    // Latin but not orthogonal to J.
    fs::write(&l, "0 1 2\n1 2 0\n").unwrap();
    let v = run(&["verify", s(&j), s(&l)]);
    assert_eq!(v.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&v.stdout).contains("pair"));

    fs::write(&l, "0 0 2\n1 2 0\n").unwrap();
    let v = run(&["verify", s(&j), s(&l)]);
    assert_eq!(v.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&v.stdout).contains("L: row 0"));
}

#[test]
fn impossible_mate_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let j = path(dir.path(), "j.txt");
    fs::write(&j, "0 1\n1 0\n").unwrap();
    assert_eq!(run(&["mate", s(&j), "--algorithm", "backtrack"]).status.code(), Some(2));
    assert_eq!(run(&["mate", s(&j), "--epsilon", "0"]).status.code(), Some(2));
}

#[test]
fn trials_and_diagnostics_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let csv = path(dir.path(), "t.csv");
    let out = run(&["trials", "--n", "8", "--epsilon", "0.75", "--count", "5", "--out", s(&csv)]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("success fraction"));
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("# latin-mate trials schema v1\ntrial,seed,n,m,epsilon"));
    assert_eq!(text.lines().count(), 7);

    let diag_dir = path(dir.path(), "diag");
    let out = run(&[
        "diag", "--n", "16", "--epsilon", "0.5", "--count", "3", "--diag", s(&diag_dir),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["ensemble"]["runs"], 3);
    assert!(report["success_fraction"].as_f64().is_some());
    for i in 0..3 {
        let t = fs::read_to_string(diag_dir.join(format!("trial_{i:04}.csv"))).unwrap();
        assert!(t.starts_with("t,b_sum_min,b_sum_max"));
    }
}
