use std::path::Path;
use std::process::{Command, Output};

use toric_ech::experiments::{emit_report, run_ched_warmup, ChedConfig, Format};
use toric_ech::EchError;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_toric-ech"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name).display().to_string()
}

#[test]
fn reports_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [&a, &b] {
        let out = run(&["notsame", "--eps", "1/8", "--kmax", "300", "--out", dir.path().to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for f in ["notsame.json", "notsame.csv"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        assert_eq!(x, std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    let csv = std::fs::read_to_string(a.path().join("notsame.csv")).unwrap();
    assert!(csv.starts_with("k,c_x2_num,c_x2_den,c_ball_num,c_ball_den,log_ratio\n"));
    assert_eq!(csv.lines().count(), 301);
}

#[test]
fn seeded_charts_repeat() {
    let go = |seed: &str| run(&["chart", "--random", "8", "--dim", "2", "--seed", seed]).stdout;
    assert_eq!(go("5"), go("5"));
    assert_ne!(go("5"), go("6"));
}

#[test]
fn exit_code_follows_verdicts() {
    assert!(run(&["weyl", "--kmax", "10000"]).status.success());
    let strict = run(&["weyl", "--kmax", "100", "--tolerance", "0.001"]);
    assert_eq!(strict.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&strict.stderr).contains("FAIL weyl"));
}

#[test]
fn missing_output_directory_is_named() {
    let out = run(&["ched", "--out", "/definitely/not/here"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/definitely/not/here"));

    let rep = run_ched_warmup(&ChedConfig { k0_max: 3, ..Default::default() }).unwrap();
    let err = emit_report(&rep, Path::new("/definitely/not/here"), &[Format::Csv]).unwrap_err();
    assert!(matches!(&err, EchError::Io { path, .. } if path == "/definitely/not/here"));
}

#[test]
fn domain_files() {
    let out = run(&["capacity", &data("e23.json"), "--k", "3"]);
    assert!(out.status.success());
    let rep: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rep["rows"][0][1], "4");
    assert_eq!(rep["columns"][0], "k");
    assert_eq!(rep["columns"][1], "c_k_num");

    let out = run(&["weights", &data("notsame.json")]);
    let w: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(w, serde_json::json!([["1/1", "1"], ["1/4", "16"]]));

    let out = run(&["realize", &data("weights.json")]);
    let p: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(p, serde_json::json!([["0/1", "2/1"], ["1/2", "1/2"], ["1/1", "0/1"]]));

    let out = run(&["distance", &data("ball.json"), &data("notsame.json"), "--kmax", "500"]);
    assert!(out.status.success());

    let out = run(&["build-flat", "--params", "9,81", "--threshold", "8"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["admissibility"]["above_threshold"], true);
    let out = run(&["build-flat", "--params", "9,81"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["admissibility"]["above_threshold"], false);

    let bad = run(&["capacity", "/no/such/file.json", "--k", "1"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("/no/such/file.json"));
}

#[test]
fn chart_points_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("pts.csv");
    std::fs::write(&pts, "x\n0\n-2\n5/2\n").unwrap();
    let out = run(&["chart", "--points", pts.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("chart.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x,y,b,snap_error"));
    assert!(lines.next().unwrap().starts_with("0/1,6/1;15/1,400/1;"));
}
