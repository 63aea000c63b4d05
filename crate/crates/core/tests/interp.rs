//! Both evaluators on the corpus: equivalence over seeded inputs, the
//! reverse call trace, and detection of a broken translation.

mod common;

use defun_verify::defunc::{FoExpr, FoKind};
use defun_verify::interp::{equiv_check, eval_fo, eval_ho, Value, DEFAULT_FUEL};
use defun_verify::{compile, entry_pragma, Compiled};

const CORPUS: [&str; 4] = ["reverse", "length", "height", "interp"];
const INPUTS: u64 = 500;

fn load(name: &str) -> (String, Compiled) {
    let src = std::fs::read_to_string(format!("corpus/{name}.mlg")).unwrap();
    let entry = entry_pragma(&src).unwrap();
    (entry, compile(&src).unwrap())
}

#[test]
fn corpus_agrees_on_seeded_inputs() {
    for name in CORPUS {
        let (entry, c) = load(name);
        let r = equiv_check(&c, &entry, 2024, INPUTS, DEFAULT_FUEL).unwrap();
        assert!(r.passed(), "{name}: {}", r.counterexample.unwrap());
        assert_eq!(r.trials, INPUTS, "{name}");
        assert_eq!(r.inconclusive, 0, "{name}");
        assert_eq!(r.agreed + r.filtered, INPUTS, "{name}");
        assert!(r.agreed >= INPUTS * 9 / 10, "{name}: only {} inputs met the precondition", r.agreed);
        assert_eq!(r.ensures_failed, 0, "{name}");
    }
}

#[test]
fn equivalence_is_reproducible() {
    let (entry, c) = load("height");
    let a = equiv_check(&c, &entry, 5, 50, DEFAULT_FUEL).unwrap();
    let b = equiv_check(&c, &entry, 5, 50, DEFAULT_FUEL).unwrap();
    assert_eq!(format!("{a:?}"), format!("{b:?}"));
}

#[test]
fn reverse_trace_matches_the_reference_run() {
    let (_, c) = load("reverse");
    common::reference::check_reverse_trace(&c).unwrap();
}

fn swap_sub_operands(e: &mut FoExpr) -> bool {
    match &mut e.kind {
        FoKind::Ctor(c, xs) if c == "Sub" && xs.len() == 2 => {
            xs.swap(0, 1);
            true
        }
        FoKind::Ctor(_, xs) | FoKind::Tuple(xs) | FoKind::Call(_, xs) => xs.iter_mut().any(swap_sub_operands),
        FoKind::BinOp(_, a, b) | FoKind::Seq(a, b) | FoKind::Let(_, a, b) => {
            swap_sub_operands(a) || swap_sub_operands(b)
        }
        FoKind::UnOp(_, a) => swap_sub_operands(a),
        FoKind::If(a, b, d) => swap_sub_operands(a) || swap_sub_operands(b) || swap_sub_operands(d),
        FoKind::Match(s, arms) => swap_sub_operands(s) || arms.iter_mut().any(|(_, b)| swap_sub_operands(b)),
        _ => false,
    }
}

#[test]
fn equivalence_catches_a_swapped_constructor_argument() {
    let (entry, mut c) = load("interp");
    let apply = c.target.functions.iter_mut().find(|f| f.name == "apply0").unwrap();
    let FoKind::Match(_, arms) = &mut apply.body.kind else { panic!() };
    let (_, arm) = arms.iter_mut().find(|(p, _)| format!("{p:?}").contains("K1")).unwrap();
    assert!(swap_sub_operands(arm));
    let r = equiv_check(&c, &entry, 2024, 100, DEFAULT_FUEL).unwrap();
    let cx = r.counterexample.expect("mutant not detected");
    assert_ne!(cx.ho, cx.fo);
}

#[test]
fn both_sides_reject_bad_inputs_alike() {
    let src = "let hd (l : int list) : int = match l with x :: _ -> x\nlet q (a : int) (b : int) : int = a / b\n";
    let c = compile(src).unwrap();
    let nil = [Value::nil()];
    let ho = eval_ho(&c.typed, "hd", &nil, DEFAULT_FUEL).unwrap_err();
    let fo = eval_fo(&c.target, "hd", &nil, DEFAULT_FUEL).unwrap_err();
    assert!(ho.kind.same_kind(&fo.kind));
    let args = [Value::Int(1), Value::Int(0)];
    let ho = eval_ho(&c.typed, "q", &args, DEFAULT_FUEL).unwrap_err();
    let fo = eval_fo(&c.target, "q", &args, DEFAULT_FUEL).unwrap_err();
    assert!(ho.kind.same_kind(&fo.kind));
    assert_eq!(eval_fo(&c.target, "q", &[Value::Int(-7), Value::Int(2)], DEFAULT_FUEL).unwrap(), Value::Int(-3));
}
