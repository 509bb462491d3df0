use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};
use std::io::Write;

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_iepkit"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

struct Gap {
    _dir: tempfile::TempDir,
    phi: PathBuf,
    psi: PathBuf,
    union: PathBuf,
    root: PathBuf,
}

fn gap() -> Gap {
    let dir = tempfile::tempdir().unwrap();
    let phi = write(dir.path(), "phi.mf", "<><>p & ~<>p\n");
    let psi = write(dir.path(), "psi.mf", "<><>~q | q\n");
    let union = write(
        dir.path(),
        "union.json",
        r#"{"worlds":4,"rel":[[0,1],[1,0],[1,1],[2,3],[3,3]],"val":{"p":[0],"q":[3]}}"#,
    );
    let root = dir.path().to_path_buf();
    Gap {
        _dir: dir,
        phi,
        psi,
        union,
        root,
    }
}

#[test]
fn parse_echoes_canonical_form() {
    let mut child = bin()
        .args(["parse", "--formula", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"true").unwrap();
    let o = child.wait_with_output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "true");

    let g = gap();
    let o = run(&["parse", "--formula", s(&g.phi), "--json"]);
    let v = stdout_json(&o);
    assert_eq!(v["formula"], "<><>p & ~<>p");
    assert_eq!(v["modal_depth"], 2);
}

#[test]
fn iep_reports_the_wk4_gap_and_the_witness_reverifies() {
    let g = gap();
    let w = g.root.join("w.json");
    let dot = g.root.join("w.dot");
    let o = run(&[
        "iep", "--logic", "wk4", "--bound", "3", "--phi", s(&g.phi), "--psi", s(&g.psi),
        "--emit-witness", s(&w), "--emit-dot", s(&dot),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let v = stdout_json(&o);
    assert_eq!(v["verdict"], "no-interpolant");
    assert!(v["witness"]["phi"]["root"].is_number());
    assert!(fs::read_to_string(&dot).unwrap().contains("style=dashed"));

    let o = run(&["iep", "--logic", "wk4", "--phi", s(&g.phi), "--psi", s(&g.psi), "--verify-only", s(&w)]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout_json(&o)["verified"], true);

    let o = run(&["bisim", "--witness", s(&w)]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["is_bisimulation"], true);
    assert_eq!(v["roots_related"], true);

    // the same witness does not refute the swapped pair
    let o = run(&["iep", "--logic", "wk4", "--phi", s(&g.psi), "--psi", s(&g.phi), "--verify-only", s(&w)]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn iep_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "p.mf", "p & r");
    let q = write(dir.path(), "q.mf", "p | q");
    let o = run(&["iep", "--bound", "2", "--phi", s(&p), "--psi", s(&q), "--find-interpolant", "0,1"]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["verdict"], "has-interpolant-up-to-bound");
    assert_eq!(v["interpolant"], "p");

    let o = run(&["iep", "--logic", "dl", "--phi", s(&q), "--psi", s(&p)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout_json(&o)["countermodel"]["worlds"].is_number());

    assert_eq!(run(&["iep", "--phi", "/nonexistent", "--psi", s(&p)]).status.code(), Some(3));
    let bad = write(dir.path(), "bad.mf", "p &");
    assert_eq!(run(&["iep", "--phi", s(&bad), "--psi", s(&p)]).status.code(), Some(3));
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(run(&["iep", "--phi", "x"]).status.code(), Some(64));
    assert_eq!(run(&["sat", "--bound", "0", "--formula", "x"]).status.code(), Some(64));
    assert_eq!(run(&["filtrate", "--phi", "a", "--psi", "b", "--model", "m", "--designate", "1"]).status.code(), Some(64));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn output_is_deterministic() {
    let g = gap();
    let args = ["iep", "--logic", "wk4", "--bound", "3", "--phi", s(&g.phi), "--psi", s(&g.psi)];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
    let fuzz = ["fuzz", "--module", "filtration", "--seeds", "40", "--seed", "5"];
    let one = bin().args(fuzz).env("IEPKIT_WORKERS", "1").output().unwrap();
    let three = bin().args(fuzz).env("IEPKIT_WORKERS", "3").output().unwrap();
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, three.stdout);
}

#[test]
fn sat_and_valid() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "f.mf", "<><>p & ~<>p");
    let m = dir.path().join("m.json");
    let o = run(&["sat", "--logic", "wk4", "--bound", "3", "--formula", s(&f), "--emit-model", s(&m)]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["status"], "satisfiable");
    assert_eq!(v["model"]["worlds"], 2);
    assert!(fs::read_to_string(&m).unwrap().contains("\"root\":0"));

    let o = run(&["sat", "--logic", "dl", "--formula", s(&f), "--engine", "enumerate"]);
    assert_eq!(stdout_json(&o)["status"], "satisfiable");

    let g = gap();
    let o = run(&["valid", "--bound", "4", "--phi", s(&g.phi), "--psi", s(&g.psi)]);
    assert_eq!(stdout_json(&o)["valid"], true);
    let o = run(&["valid", "--bound", "4", "--phi", s(&g.psi), "--psi", s(&g.phi)]);
    assert_eq!(stdout_json(&o)["valid"], false);
}

#[test]
fn bisim_between_model_files() {
    let g = gap();
    let dir = tempfile::tempdir().unwrap();
    let one = write(dir.path(), "one.json", r#"{"worlds":1,"rel":[[0,0]],"val":{"p":[]},"root":0}"#);
    // over no variables every serial world matches the reflexive point
    let o = run(&["bisim", "--left", s(&g.union), "--right", s(&one), "--rho", ""]);
    assert_eq!(stdout_json(&o)["maximal"].as_array().unwrap().len(), 4);
    let o = run(&["bisim", "--left", s(&g.union), "--right", s(&one), "--rho", "p"]);
    assert_eq!(stdout_json(&o)["maximal"], serde_json::json!([[2, 0], [3, 0]]));
    let rel = write(dir.path(), "rel.json", "[[1,0],[3,0]]");
    let o = run(&["bisim", "--left", s(&g.union), "--right", s(&one), "--rho", "p", "--relation", s(&rel)]);
    assert_eq!(stdout_json(&o)["is_bisimulation"], false);
}

#[test]
fn filtrate_with_report_and_checks() {
    let g = gap();
    let out = g.root.join("dagger.json");
    let dot = g.root.join("dagger.dot");
    let o = run(&[
        "filtrate", "--phi", s(&g.phi), "--psi", s(&g.psi), "--model", s(&g.union), "--designate", "0,2",
        "--report", "--check", "--out", s(&out), "--emit-dot", s(&dot),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    assert_eq!(v["report"]["worlds"], 4);
    assert_eq!(v["report"]["within_bounds"], true);
    assert_eq!(v["violations"].as_array().unwrap().len(), 0);
    assert!(v.get("model").is_none());
    assert!(fs::read_to_string(&out).unwrap().contains("\"worlds\":4"));
    assert!(fs::read_to_string(&dot).unwrap().contains("style=dashed"));

    // designated points out of range are input errors
    let o = run(&["filtrate", "--phi", s(&g.phi), "--psi", s(&g.psi), "--model", s(&g.union), "--designate", "0,9"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn tiling_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(
        dir.path(),
        "board.json",
        r#"{"tiles":["a","b"],"h":[["a","b"],["b","a"]],"v":[["a","b"],["b","a"]],"init":["a"],"n":1}"#,
    );
    let prefix = dir.path().join("board");
    let o = run(&["tiling", "solve", "--instance", s(&inst), "--out-prefix", s(&prefix)]);
    let v = stdout_json(&o);
    assert_eq!(v["solvable"], true);
    assert_eq!(v["rows"][0][0], "a");

    let o = run(&["tiling", "gen", "--instance", s(&inst), "--out-prefix", s(&prefix)]);
    assert_eq!(o.status.code(), Some(0));
    let phi = dir.path().join("board.phi");
    let psi = dir.path().join("board.psi");
    assert_eq!(run(&["parse", "--formula", s(&psi)]).status.code(), Some(0));

    let o = run(&["tiling", "witness", "--instance", s(&inst), "--out-prefix", s(&prefix)]);
    assert_eq!(stdout_json(&o)["sizes"], serde_json::json!([6, 23]));
    let w = dir.path().join("board.witness.json");
    let o = run(&["iep", "--phi", s(&phi), "--psi", s(&psi), "--verify-only", s(&w)]);
    assert_eq!(o.status.code(), Some(1));

    let o = run(&["tiling", "roundtrip", "--instance", s(&inst)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout_json(&o)["agrees"], true);

    let none = write(dir.path(), "none.json", r#"{"tiles":["a"],"n":1}"#);
    assert_eq!(run(&["tiling", "witness", "--instance", s(&none)]).status.code(), Some(3));
    let bad = write(dir.path(), "bad.json", r#"{"tiles":["a"],"n":1,"extra":0}"#);
    assert_eq!(run(&["tiling", "solve", "--instance", s(&bad)]).status.code(), Some(3));
}

#[test]
fn fuzz_modules_pass() {
    for module in ["filtration", "axiom", "shrink"] {
        let o = run(&["fuzz", "--module", module, "--seeds", "30", "--max-worlds", "5"]);
        assert_eq!(o.status.code(), Some(0), "{module}");
        let v = stdout_json(&o);
        assert_eq!(v["failures"].as_array().unwrap().len(), 0);
    }
}
