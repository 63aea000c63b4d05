//! The `defun-verify` binary end to end.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_defun-verify")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn check_accepts_the_corpus() {
    for name in ["reverse", "length", "height", "interp"] {
        let o = run(&["check", &format!("corpus/{name}.mlg")]);
        assert!(o.status.success(), "{name}: {}", stderr(&o));
        assert!(stdout(&o).contains(": ok ("));
    }
}

#[test]
fn check_reports_errors_with_positions() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.mlg");
    std::fs::write(&bad, "let f (u : unit) : int =\n  (fun x : int -> x) 1\n").unwrap();
    let o = run(&["check", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("bad.mlg:2:"), "{err}");
    assert!(err.contains("missing type annotation"), "{err}");
}

#[test]
fn emit_whyml_writes_the_module() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["emit", "corpus/length.mlg", "-o", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("length.mlw")).unwrap();
    assert_eq!(text, std::fs::read_to_string("tests/golden/length.mlw").unwrap());
}

#[test]
fn emit_smt2_writes_scripts_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["emit", "corpus/length.mlg", "--format", "smt2", "-o", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let manifest = std::fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
    let rows: Vec<Vec<&str>> = manifest.lines().map(|l| l.split('\t').collect()).collect();
    assert_eq!(rows.len(), 5);
    for row in rows {
        assert_eq!(row[2], "unsat");
        assert!(dir.path().join(row[1]).exists());
    }
}

#[test]
fn run_prints_the_trace_and_result() {
    let o = run(&["run", "corpus/reverse.mlg", "--arg", "[1;2;3]", "--target", "--trace"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.first(), Some(&"reverse [1;2;3]"));
    assert_eq!(lines.last(), Some(&"[3;2;1]"));
    assert!(lines.contains(&"apply0 K0(3, K0(2, K0(1, K1))) []"));
}

#[test]
fn run_source_and_target_agree() {
    let args = ["run", "corpus/interp.mlg", "--entry", "red", "--arg", "Sub (Const 5, Sub (Const 3, Const 1))"];
    let ho = run(&args);
    let mut fo_args = args.to_vec();
    fo_args.push("--target");
    let fo = run(&fo_args);
    assert!(ho.status.success() && fo.status.success(), "{}{}", stderr(&ho), stderr(&fo));
    assert_eq!(stdout(&ho), stdout(&fo));
    assert_eq!(stdout(&ho).trim(), "3");
}

#[test]
fn trace_needs_target() {
    let o = run(&["run", "corpus/reverse.mlg", "--arg", "[1]", "--trace"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn equiv_passes_on_the_corpus() {
    let o = run(&["equiv", "corpus/height.mlg", "--trials", "50", "--seed", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn corpus_summary_as_json() {
    let o = run(&["corpus", "corpus", "--trials", "20", "--json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 4);
}

#[test]
fn missing_file_fails() {
    let o = run(&["check", "corpus/nope.mlg"]);
    assert_eq!(o.status.code(), Some(1));
}
