//! Transformation invariants over the corpus and generated programs,
//! checked both by the library walkers and by walkers over the emitted
//! WhyML written here.

mod common;

use common::walkers::{check_all, check_captures, check_dispatch};
use defun_verify::emit::emit_whyml;
use defun_verify::emit::parse_whyml::parse_whyml;
use defun_verify::interp::equiv_check;
use defun_verify::{compile, Compiled};
use proptest::prelude::*;

const CORPUS: [&str; 4] = ["reverse", "length", "height", "interp"];
const GENERATED: u64 = 200;

fn compile_generated(seed: u64) -> Compiled {
    let src = common::progs::program(seed);
    compile(&src).unwrap_or_else(|e| panic!("generated program {seed} rejected: {}\n{src}", e.detail()))
}

#[test]
fn corpus_invariants() {
    for name in CORPUS {
        let src = std::fs::read_to_string(format!("corpus/{name}.mlg")).unwrap();
        check_all(&compile(&src).unwrap()).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn generated_program_invariants() {
    let mut sites = 0;
    let mut families = 0;
    for seed in 0..GENERATED {
        let c = compile_generated(seed);
        sites += c.target.sites.len();
        families += c.target.families.len();
        check_all(&c).unwrap_or_else(|e| panic!("generated {seed}: {e}"));
    }
    // the generator must actually exercise defunctionalization
    assert!(sites > GENERATED as usize, "only {sites} sites");
    assert!(families > GENERATED as usize / 2, "only {families} families");
}

#[test]
fn generated_programs_agree_with_their_translation() {
    for seed in 0..GENERATED {
        let c = compile_generated(seed);
        let r = equiv_check(&c, "main", seed, 20, 100_000).unwrap();
        assert!(r.passed(), "generated {seed}: {}\n{}", r.counterexample.unwrap(), common::progs::program(seed));
    }
}

#[test]
fn walkers_reject_broken_output() {
    let src = std::fs::read_to_string("corpus/interp.mlg").unwrap();
    let c = compile(&src).unwrap();
    let text = emit_whyml(&c.target);

    // drop the last arm of the first apply
    let start = text.find("let rec function apply").unwrap();
    let end = start + text[start..].find("  end").unwrap();
    let arm = text[..end].rfind("\n  | ").unwrap();
    let truncated = format!("{}{}", &text[..arm + 1], &text[end..]);
    let m = parse_whyml(&truncated).unwrap();
    assert!(check_dispatch(&m).is_err());

    // swap the captured variables of a two-field constructor
    let m = parse_whyml(&text).unwrap();
    let consumers = check_dispatch(&m).unwrap();
    let (ctor, vars) = consumers
        .iter()
        .flat_map(|arms| arms.iter())
        .find(|(c, vs)| vs.len() == 2 && vs[0] != vs[1] && !text.contains(&format!("{c} {} {}", vs[1], vs[0])))
        .map(|(c, vs)| (c.clone(), vs.clone()))
        .unwrap();
    let built = format!("({ctor} {} {})", vars[0], vars[1]);
    assert!(text.contains(&built), "{built}");
    let swapped = text.replace(&built, &format!("({ctor} {} {})", vars[1], vars[0]));
    let m = parse_whyml(&swapped).unwrap();
    assert!(check_captures(&c, &m, &consumers).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn any_generated_program_translates_cleanly(seed in any::<u64>()) {
        let c = compile_generated(seed);
        check_all(&c).unwrap_or_else(|e| panic!("generated {seed}: {e}"));
        let r = equiv_check(&c, "main", seed, 5, 100_000).unwrap();
        prop_assert!(r.passed(), "{}", r.counterexample.unwrap());
    }
}
