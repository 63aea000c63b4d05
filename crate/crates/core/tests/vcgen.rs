//! Verification conditions: the enumerated length set, SMT-LIB well-formedness
//! by an independent checker, and solver answers when a solver is installed.

mod common;

use std::time::Duration;

use common::smtlib::check_script;
use defun_verify::vcgen::{parse_expectations, run_solver, solver_path, Answer, VcKind};
use defun_verify::{compile, verification_conditions, Compiled};

const CORPUS: [&str; 4] = ["reverse", "length", "height", "interp"];
const TIMEOUT: Duration = Duration::from_secs(5);

fn compiled(name: &str) -> Compiled {
    compile(&std::fs::read_to_string(format!("corpus/{name}.mlg")).unwrap()).unwrap()
}

fn expectations(name: &str) -> std::collections::HashMap<String, String> {
    parse_expectations(&std::fs::read_to_string(format!("corpus/{name}.vcexpect")).unwrap())
}

#[test]
fn length_has_the_enumerated_obligations() {
    let vcs = verification_conditions(&compiled("length")).unwrap();
    let got: Vec<(&str, String)> = vcs
        .iter()
        .map(|(vc, _)| {
            let kind = match &vc.kind {
                VcKind::Postcondition => "post".to_string(),
                VcKind::Precondition { callee } => format!("pre {callee}"),
                VcKind::Unreachable => "unreachable".into(),
                VcKind::Lemma => "lemma".into(),
            };
            (vc.name.as_str(), kind)
        })
        .collect();
    // apply: one obligation per arm; length_cps: one per list case; len:
    // its ensures from the callee's post with the identity continuation.
    let want = [
        ("vc_apply0_0", "post"),
        ("vc_apply0_1", "post"),
        ("vc_length_cps_0", "post"),
        ("vc_length_cps_1", "post"),
        ("vc_len_0", "post"),
    ];
    assert_eq!(got.len(), 5);
    for ((g, gk), (w, wk)) in got.iter().zip(want) {
        assert_eq!((*g, gk.as_str()), (w, wk));
    }
}

#[test]
fn expectation_files_name_every_vc() {
    for name in CORPUS {
        let vcs = verification_conditions(&compiled(name)).unwrap();
        let expect = expectations(name);
        let names: Vec<&String> = vcs.iter().map(|(vc, _)| &vc.name).collect();
        assert_eq!(names.len(), expect.len(), "{name}");
        for n in names {
            assert!(expect.contains_key(n), "{name}: {n} has no expectation");
        }
    }
}

#[test]
fn every_script_is_well_formed() {
    for name in CORPUS {
        for (vc, text) in verification_conditions(&compiled(name)).unwrap() {
            let shape = check_script(&text).unwrap_or_else(|e| panic!("{name}/{}: {e}\n{text}", vc.name));
            assert_eq!(shape.commands.get("check-sat"), Some(&1));
            assert_eq!(shape.commands.get("set-logic"), Some(&1));
        }
    }
}

#[test]
fn generated_scripts_are_well_formed() {
    for seed in 0..50 {
        let src = common::progs::program(seed);
        let c = compile(&src).unwrap();
        for (vc, text) in verification_conditions(&c).unwrap() {
            check_script(&text).unwrap_or_else(|e| panic!("generated {seed}/{}: {e}\n{text}", vc.name));
        }
    }
}

#[test]
fn checker_rejects_malformed_scripts() {
    let (_, good) = verification_conditions(&compiled("length")).unwrap().remove(0);
    check_script(&good).unwrap();
    let broken = [
        good.replacen("(check-sat)", "", 1),
        good.replacen("(assert", "(assert (", 1),
        good.replacen("(declare-const k kont0)", "", 1),
        good.replacen("Int", "Integer", 1),
        good.replacen("(set-logic ALL)", "(set-logic)", 1),
        good.replace("post0", "post0 post0"),
    ];
    for (i, text) in broken.iter().enumerate() {
        assert_ne!(text, &good, "mutation {i} did not apply");
        assert!(check_script(text).is_err(), "mutation {i} accepted");
    }
}

fn solver() -> Option<std::path::PathBuf> {
    let s = solver_path();
    if s.is_none() {
        eprintln!("no SMT solver found; skipping");
    }
    s
}

#[test]
fn corpus_vcs_meet_their_expectations() {
    let Some(z3) = solver() else { return };
    for name in CORPUS {
        let expect = expectations(name);
        for (vc, text) in verification_conditions(&compiled(name)).unwrap() {
            // `unknown` expectations only pass by timing out
            if expect[&vc.name] != "unsat" {
                continue;
            }
            let got = run_solver(&z3, &text, TIMEOUT);
            assert!(got.meets(&expect[&vc.name]), "{name}/{}: {}", vc.name, got.as_str());
            assert_eq!(got, Answer::Unsat, "{name}/{}", vc.name);
        }
    }
}

#[test]
fn red_needs_the_lemma() {
    let Some(z3) = solver() else { return };
    let find = |c: &Compiled| {
        verification_conditions(c).unwrap().into_iter().find(|(vc, _)| vc.name == "vc_red_3").unwrap().1
    };
    let mut c = compiled("interp");
    assert_eq!(run_solver(&z3, &find(&c), TIMEOUT), Answer::Unsat);
    c.target.lemmas.clear();
    assert_ne!(run_solver(&z3, &find(&c), TIMEOUT), Answer::Unsat);
}

#[test]
fn a_false_postcondition_is_not_proved() {
    let Some(z3) = solver() else { return };
    let src = std::fs::read_to_string("corpus/length.mlg").unwrap().replace("ensures r = length l", "ensures r = length l + 1");
    let c = compile(&src).unwrap();
    let vcs = verification_conditions(&c).unwrap();
    let (_, text) = vcs.iter().find(|(vc, _)| vc.name == "vc_len_0").unwrap();
    assert_eq!(run_solver(&z3, text, TIMEOUT), Answer::Sat);
}
