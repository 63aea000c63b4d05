//! Acceptance suite: one PASS/FAIL line per criterion. Exits non-zero when
//! any criterion fails.

mod common;

use std::collections::HashMap;
use std::time::{Duration, Instant};

use common::reference::{check_chain, check_curried, check_reverse_trace};
use common::smtlib::check_script;
use common::walkers::check_all;
use defun_verify::defunc::DefuncError;
use defun_verify::emit::alpha::alpha_equivalent;
use defun_verify::emit::emit_whyml;
use defun_verify::emit::parse_whyml::parse_whyml;
use defun_verify::interp::{equiv_check, DEFAULT_FUEL};
use defun_verify::typing::TypeErrorKind;
use defun_verify::vcgen::{run_solver, solver_path, Answer};
use defun_verify::{check_source, compile, entry_pragma, verification_conditions, Compiled, Error};

const CORPUS: [&str; 4] = ["reverse", "length", "height", "interp"];
const CORPUS_TRIALS: u64 = 100;
const CORPUS_BUDGET: Duration = Duration::from_secs(10);
const EQUIV_INPUTS: u64 = 500;
const EQUIV_SEED: u64 = 2024;
const GENERATED_PROGRAMS: u64 = 200;
const SOLVER_TIMEOUT: Duration = Duration::from_secs(5);
const LENGTH_VCS: [&str; 5] = ["vc_apply0_0", "vc_apply0_1", "vc_length_cps_0", "vc_length_cps_1", "vc_len_0"];

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn source(name: &str) -> Result<String, String> {
    std::fs::read_to_string(format!("corpus/{name}.mlg")).map_err(|e| format!("{name}: {e}"))
}

fn load(name: &str) -> Result<(String, Compiled), String> {
    let src = source(name)?;
    let entry = entry_pragma(&src).ok_or_else(|| format!("{name}: no entry comment"))?;
    let c = compile(&src).map_err(|e| format!("{name}: {e}"))?;
    Ok((entry, c))
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn corpus_fidelity() -> Outcome {
    let start = Instant::now();
    for name in CORPUS {
        let src = source(name)?;
        check_source(&src).map_err(|e| format!("{name}: check: {e}"))?;
        let (entry, c) = load(name)?;
        let text = emit_whyml(&c.target);
        parse_whyml(&text).map_err(|e| format!("{name}: emitted WhyML does not parse: {e}"))?;
        let r = equiv_check(&c, &entry, 0, CORPUS_TRIALS, DEFAULT_FUEL).map_err(|e| format!("{name}: {e}"))?;
        ensure(r.passed(), || format!("{name}: {}", r.counterexample.as_ref().unwrap()))?;
        ensure(r.inconclusive == 0, || format!("{name}: {} inconclusive trials", r.inconclusive))?;
    }
    let took = start.elapsed();
    ensure(took < CORPUS_BUDGET, || format!("took {took:?}"))?;
    Ok(format!("4 programs, {CORPUS_TRIALS} trials each, {:.2}s", took.as_secs_f64()))
}

fn golden_length() -> Outcome {
    let (_, c) = load("length")?;
    let t = &c.target;
    let applies = t.functions.iter().filter(|f| t.families.iter().any(|fam| fam.apply == f.name)).count();
    let shape = (t.families.len(), t.families.first().map_or(0, |f| f.sites.len()), applies, t.posts.len());
    ensure(shape == (1, 2, 1, 1), || format!("families/ctors/applies/posts = {shape:?}"))?;
    let text = emit_whyml(t);
    ensure(text.contains("ensures { post0 k (length l) result }"), || "recursive ensures missing".into())?;
    let want = std::fs::read_to_string("tests/fixtures/length_defun.mlw").map_err(|e| e.to_string())?;
    let want = parse_whyml(&want).map_err(|e| e.to_string())?;
    let got = parse_whyml(&text).map_err(|e| e.to_string())?;
    alpha_equivalent(&got, &want)?;
    Ok("1 family, 2 constructors, 1 apply, 1 post; renaming of the reference module".into())
}

fn curry_rules() -> Outcome {
    check_curried()?;
    check_chain()?;
    Ok("2 families, `result = K1 y x`, forall chain".into())
}

fn semantic_preservation() -> Outcome {
    let mut agreed = 0;
    for name in CORPUS {
        let (entry, c) = load(name)?;
        let r = equiv_check(&c, &entry, EQUIV_SEED, EQUIV_INPUTS, DEFAULT_FUEL).map_err(|e| format!("{name}: {e}"))?;
        ensure(r.passed(), || format!("{name}: {}", r.counterexample.as_ref().unwrap()))?;
        ensure(r.inconclusive == 0 && r.agreed + r.filtered == EQUIV_INPUTS, || format!("{name}: {r:?}"))?;
        agreed += r.agreed;
    }
    let (_, c) = load("reverse")?;
    check_reverse_trace(&c)?;
    Ok(format!("{agreed} agreeing runs over {EQUIV_INPUTS} inputs per program; reverse trace matches"))
}

fn transform_invariants() -> Outcome {
    for name in CORPUS {
        let (_, c) = load(name)?;
        check_all(&c).map_err(|e| format!("{name}: {e}"))?;
    }
    let mut sites = 0;
    for seed in 0..GENERATED_PROGRAMS {
        let src = common::progs::program(seed);
        let c = compile(&src).map_err(|e| format!("generated {seed}: {e}"))?;
        check_all(&c).map_err(|e| format!("generated {seed}: {e}"))?;
        sites += c.target.sites.len();
    }
    Ok(format!("corpus and {GENERATED_PROGRAMS} generated programs ({sites} sites)"))
}

fn vc_pipeline() -> Outcome {
    let (_, length) = load("length")?;
    let vcs = verification_conditions(&length).map_err(|e| e.to_string())?;
    let names: Vec<&str> = vcs.iter().map(|(vc, _)| vc.name.as_str()).collect();
    ensure(names == LENGTH_VCS, || format!("length VCs {names:?}"))?;
    let mut scripts = 0;
    for name in CORPUS {
        let (_, c) = load(name)?;
        for (vc, text) in verification_conditions(&c).map_err(|e| e.to_string())? {
            check_script(&text).map_err(|e| format!("{name}/{}: {e}", vc.name))?;
            scripts += 1;
        }
    }
    let Some(z3) = solver_path() else {
        return Ok(format!("5 length VCs, {scripts} well-formed scripts; no solver, solver checks skipped"));
    };
    for (vc, text) in &vcs {
        let got = run_solver(&z3, text, SOLVER_TIMEOUT);
        ensure(got == Answer::Unsat, || format!("{}: {}", vc.name, got.as_str()))?;
    }
    let (_, mut interp) = load("interp")?;
    let red = |c: &Compiled| -> Result<String, String> {
        let vcs = verification_conditions(c).map_err(|e| e.to_string())?;
        vcs.into_iter().find(|(vc, _)| vc.name == "vc_red_3").map(|(_, t)| t).ok_or_else(|| "no vc_red_3".into())
    };
    let with = run_solver(&z3, &red(&interp)?, SOLVER_TIMEOUT);
    ensure(with == Answer::Unsat, || format!("red with lemma: {}", with.as_str()))?;
    interp.target.lemmas.clear();
    let without = run_solver(&z3, &red(&interp)?, SOLVER_TIMEOUT);
    ensure(without != Answer::Unsat, || "red proved without the lemma".into())?;
    Ok(format!(
        "5 length VCs unsat, {scripts} well-formed scripts, red unsat with lemma and {} without",
        without.as_str()
    ))
}

fn error_contracts() -> Outcome {
    let mut seen = HashMap::new();
    let cases = [
        ("no family", "let app (f : int -> bool) (x : int) : bool = f x\n"),
        (
            "exempt as value",
            "let pos (x : int) : int = x\n(*@ r = pos x\n    requires x > 0 *)\n\
             let app (f : int -> int) : int = f 1\nlet use (u : unit) : int = app pos\n",
        ),
        ("annotation missing", "let f (u : unit) : int = (fun x : int -> x) 1\n"),
    ];
    for (label, src) in cases {
        let e = compile(src).err().ok_or_else(|| format!("{label}: accepted"))?;
        let ok = match (label, &e) {
            ("no family", Error::Defunc(DefuncError::NoFamily { .. })) => {
                e.to_string().contains("no functions of type int -> bool are defined")
            }
            ("exempt as value", Error::Defunc(DefuncError::ExemptAsValue { name, .. })) => name == "pos",
            ("annotation missing", Error::Type(t)) => matches!(t.kind, TypeErrorKind::AnnotationMissing(_)),
            _ => false,
        };
        ensure(ok, || format!("{label}: got {e}"))?;
        seen.insert(label, e.detail());
    }
    Ok(format!("{} diagnostics", seen.len()))
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("corpus fidelity", corpus_fidelity),
        ("golden length structure", golden_length),
        ("curry and post expansion", curry_rules),
        ("semantic preservation", semantic_preservation),
        ("transform invariants", transform_invariants),
        ("verification conditions", vc_pipeline),
        ("error contracts", error_contracts),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(note) => println!("PASS {} {name}: {note}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
