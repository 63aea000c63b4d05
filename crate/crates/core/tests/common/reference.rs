//! Comparison with the reference run of list reversal, whose names and
//! `apply` argument order differ from the generated ones.

use defun_verify::interp::{eval_fo_traced, Value, DEFAULT_FUEL};
use defun_verify::emit::alpha::alpha_equivalent;
use defun_verify::emit::emit_whyml;
use defun_verify::emit::parse_whyml::parse_whyml;
use defun_verify::emit::whyml::{Decl, Module, Term};
use defun_verify::{compile, Compiled};

/// Renames identifiers of a trace line.
pub fn rename(line: &str, map: &[(&str, &str)]) -> String {
    let mut out = String::new();
    let mut word = String::new();
    let flush = |word: &mut String, out: &mut String| {
        let w = map.iter().find(|(a, _)| a == word).map(|(_, b)| b.to_string()).unwrap_or_else(|| word.clone());
        out.push_str(&w);
        word.clear();
    };
    for ch in line.chars() {
        if ch.is_alphanumeric() || ch == '_' {
            word.push(ch);
        } else {
            flush(&mut word, &mut out);
            out.push(ch);
        }
    }
    flush(&mut word, &mut out);
    out
}

const NAMES: [(&str, &str); 5] = [
    ("reverse", "reverse_defun"),
    ("reverse_aux_cps", "reverse_aux_defun"),
    ("apply0", "apply"),
    ("K0", "Krev"),
    ("K1", "Kid"),
];

/// Runs the compiled reversal on `[1;2;3]` and compares its call trace,
/// renamed, with `tests/fixtures/reverse_trace.txt`.
pub fn check_reverse_trace(c: &Compiled) -> Result<(), String> {
    let input = Value::list([1, 2, 3].map(Value::Int));
    let (result, trace) = eval_fo_traced(&c.target, "reverse", &[input], DEFAULT_FUEL);
    let result = result.map_err(|e| e.to_string())?;
    if result.to_string() != "[3;2;1]" {
        return Err(format!("result {result}"));
    }
    let got: Vec<String> = trace
        .iter()
        .map(|l| {
            let l = rename(l, &NAMES);
            // the reference run writes the list argument of `apply` first
            match l.strip_prefix("apply ").and_then(|rest| rest.rsplit_once(' ')) {
                Some((k, arg)) => format!("apply {arg} {k}"),
                None => l,
            }
        })
        .collect();
    let want: Vec<String> = std::fs::read_to_string("tests/fixtures/reverse_trace.txt")
        .map_err(|e| e.to_string())?
        .lines()
        .map(String::from)
        .collect();
    if got == want {
        Ok(())
    } else {
        Err(format!("trace differs:\n{}\nexpected:\n{}", got.join("\n"), want.join("\n")))
    }
}

pub const CURRIED: &str = "let f (y : int) : int -> int -> int = fun (x : int) (z : int) : int -> x + y\n";

pub const CHAIN: &str = "\
let f (g : int -> int -> int) (x : int) (y : int) : int = g x y
(*@ r = f g x y
    ensures post (g : int -> int -> int) x y r *)

let main (a : int) : int = f (fun (p : int) (q : int) : int -> p - q) a 1
";

fn module(src: &str) -> Result<Module, String> {
    let c = compile(src).map_err(|e| e.to_string())?;
    parse_whyml(&emit_whyml(&c.target)).map_err(|e| e.to_string())
}

pub fn ensures_of(m: &Module, name: &str) -> Term {
    m.decls
        .iter()
        .find_map(|d| match d {
            Decl::Funs { funs, .. } => funs.iter().find(|f| f.name == name).map(|f| f.ensures[0].clone()),
            _ => None,
        })
        .unwrap()
}

pub fn rename_term(t: &Term, map: &[(&str, &str)]) -> Term {
    let r = |s: &String| map.iter().find(|(a, _)| a == s).map(|(_, b)| b.to_string()).unwrap_or_else(|| s.clone());
    let b = |t: &Term| Box::new(rename_term(t, map));
    match t {
        Term::Var(x) => Term::Var(r(x)),
        Term::App(f, xs) => Term::App(r(f), xs.iter().map(|x| rename_term(x, map)).collect()),
        Term::Implies(x, y) => Term::Implies(b(x), b(y)),
        Term::Forall(vs, body) => Term::Forall(vs.clone(), b(body)),
        other => other.clone(),
    }
}

/// The curried lambda gives two families whose outer post arm is
/// `result = K1 y x`, and the whole module is a renaming of
/// `tests/fixtures/curried.mlw`.
pub fn check_curried() -> Result<(), String> {
    let c = compile(CURRIED).map_err(|e| e.to_string())?;
    if c.target.families.len() != 2 {
        return Err(format!("{} families", c.target.families.len()));
    }
    let text = emit_whyml(&c.target);
    if !text.contains("| K0 y -> let x = arg in result = (K1 y x)") {
        return Err(format!("outer post arm not found in\n{text}"));
    }
    let want = std::fs::read_to_string("tests/fixtures/curried.mlw").map_err(|e| e.to_string())?;
    let want = parse_whyml(&want).map_err(|e| e.to_string())?;
    alpha_equivalent(&module(CURRIED)?, &want)
}

/// `post g x y r` at `int -> int -> int` expands to the two-step chain.
pub fn check_chain() -> Result<(), String> {
    let got = ensures_of(&module(CHAIN)?, "f");
    // the worked example numbers the outer family 1 and the inner 2, and
    // names the result `r`
    let got = rename_term(&got, &[("post0", "post1"), ("post1", "post2"), ("result", "r")]);
    let want = parse_whyml(
        "let g (g : int) (x : int) (y : int) : int\n  ensures { forall var0 : kont1. post1 g x var0 -> post2 var0 y r } =\n  0\n",
    )
    .map_err(|e| e.to_string())?;
    let want = ensures_of(&want, "g");
    if got == want {
        Ok(())
    } else {
        Err(format!("{got:?}\nexpected\n{want:?}"))
    }
}
