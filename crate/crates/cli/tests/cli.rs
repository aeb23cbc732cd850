use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use limitop::limit_ops::{gallery, GalleryOperator, GalleryParams};
use limitop::spec_io::{parse_spec, SpecOperator};
use limitop::Interval;
use serde_json::Value;

const IDENTITY: &str = r#"{ "entryDim": 1, "diagonals": [ { "offset": 0, "kind": "constant", "value": [1, 0] } ] }"#;

const SCHRODINGER: &str = r#"{ "entryDim": 1, "diagonals": [
  { "offset": 1, "kind": "constant", "value": [1, 0] },
  { "offset": -1, "kind": "constant", "value": [1, 0] },
  { "offset": 0, "kind": "eventuallyPeriodic", "left": [[2, 0]], "coreStart": 0, "core": [[1, 0]], "right": [[0, 0]] } ] }"#;

fn limitop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_limitop"))
        .args(args)
        .env_remove("LIMITOP_THREADS")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn spec_file(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn nu_of_identity_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let id = spec_file(dir.path(), "id.json", IDENTITY);
    let out = limitop(&["nu", "--op", id.to_str().unwrap(), "--window", "0", "9"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["value"], 1.0);
    assert_eq!(v["kind"], "Exact");
}

#[test]
fn window_size_worked_values() {
    let d = |args: &[&str]| json(&limitop(args))["D"].as_u64().unwrap();
    assert_eq!(d(&["window-size", "--delta", "0.5", "--r", "2", "--w", "1"]), 260);
    assert_eq!(d(&["window-size", "--delta", "0.5", "--r", "2", "--w", "1", "--p", "inf"]), 10);
    assert_eq!(d(&["window-size", "--delta", "0.25", "--r", "1", "--w", "1", "--p", "1", "--method", "proof2"]), 64);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let id = spec_file(dir.path(), "id.json", IDENTITY);
    let bad = spec_file(dir.path(), "bad.json", r#"{ "entryDim": 1, "diagonals": [ { "offset": 0, "kind": "constant" "#);
    let unknown = spec_file(dir.path(), "unknown.json", r#"{ "entryDim": 1, "diagonals": [], "extra": 1 }"#);
    let id = id.to_str().unwrap();

    assert_eq!(code(&limitop(&["--help"])), 0);
    assert_eq!(code(&limitop(&["--version"])), 0);

    let parse = limitop(&["nu", "--op", bad.to_str().unwrap(), "--window", "0", "3"]);
    assert_eq!(code(&parse), 1);
    assert!(String::from_utf8_lossy(&parse.stderr).contains("line"));
    assert_eq!(code(&limitop(&["nu", "--op", unknown.to_str().unwrap(), "--window", "0", "3"])), 1);
    assert_eq!(code(&limitop(&["nu", "--op", "/nonexistent/spec.json", "--window", "0", "3"])), 1);

    // Missing window, p outside the supported range, unknown flags: precondition or usage errors.
    assert_eq!(code(&limitop(&["nu", "--op", id])), 2);
    assert_eq!(code(&limitop(&["example14", "--p", "1"])), 2);
    assert_eq!(code(&limitop(&["window-size", "--delta", "-1", "--r", "2", "--w", "1"])), 2);
    assert_eq!(code(&limitop(&["nu", "--op", id, "--bogus"])), 2);
    let threads = Command::new(env!("CARGO_BIN_EXE_limitop"))
        .args(["window-size", "--delta", "0.5", "--r", "2", "--w", "1"])
        .env("LIMITOP_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(code(&threads), 2);

    // Certificate arithmetic that does not fit is a numeric failure.
    assert_eq!(code(&limitop(&["window-size", "--delta", "1e-300", "--r", "10", "--w", "1"])), 3);
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let s = spec_file(dir.path(), "schro.json", SCHRODINGER);
    let s = s.to_str().unwrap();
    let runs: [&[&str]; 4] = [
        &["nu", "--op", s, "--window", "-20", "20", "--witness"],
        &["nu-d", "--op", s, "--window", "-30", "30", "-D", "12"],
        &["fredholm", "--op", s, "--delta", "0.05"],
        &["suite", "example13"],
    ];
    for args in runs {
        let (a, b) = (limitop(args), limitop(args));
        assert_eq!(code(&a), 0, "{args:?}: {}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn essspec_floquet_csv() {
    let dir = tempfile::tempdir().unwrap();
    let s = spec_file(dir.path(), "schro.json", SCHRODINGER);
    let csv = dir.path().join("cloud.csv");
    let out = limitop(&["essspec", "--op", s.to_str().unwrap(), "--samples", "64", "--out", csv.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("label,re,im"));
    for line in lines {
        let re: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((-2.0 - 1e-9..=4.0 + 1e-9).contains(&re), "{line}");
    }
}

#[test]
fn gallery_dump_round_trips() {
    for name in ["example13", "example14", "example16-flip"] {
        let out = limitop(&["gallery", name, "--n-max", "6", "--dump"]);
        assert_eq!(code(&out), 0, "{name}: {}", String::from_utf8_lossy(&out.stderr));
        let parsed = parse_spec(&String::from_utf8(out.stdout).unwrap()).expect("dump parses");
        let original = gallery(name, &GalleryParams { n_max: 6 }).unwrap();
        match (parsed, original) {
            (SpecOperator::Band(p), GalleryOperator::Band(o)) => {
                assert!(p.approx_eq_on(&o, Interval { lo: -50, hi: 200 }, 0.0), "{name}");
            }
            (SpecOperator::Flip(p), GalleryOperator::Flip(o)) => assert_eq!(p, o),
            _ => panic!("{name}: dump changed the operator kind"),
        }
    }
}

#[test]
fn suite_reports_pass() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let out = limitop(&["suite", "example16", "--out", report.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v, json(&out));
}
