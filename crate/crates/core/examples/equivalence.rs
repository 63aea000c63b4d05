//! Compare source and defunctionalized program on seeded random inputs.
//!
//! cargo run --example equivalence -- corpus/interp.mlg 500

use defun_verify::interp::{equiv_check, DEFAULT_FUEL};
use defun_verify::{compile, entry_pragma};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| "corpus/interp.mlg".into());
    let trials = args.next().map(|t| t.parse()).transpose()?.unwrap_or(500);
    let src = std::fs::read_to_string(&path)?;
    let entry = entry_pragma(&src).ok_or("no `(* entry: NAME *)` comment")?;
    let c = compile(&src)?;
    let r = equiv_check(&c, &entry, 0, trials, DEFAULT_FUEL)?;
    println!(
        "{entry}: {} agreed, {} filtered by the precondition, {} inconclusive, {} ensures checked",
        r.agreed, r.filtered, r.inconclusive, r.ensures_checked
    );
    if let Some(cx) = r.counterexample {
        println!("counterexample: {cx}");
        std::process::exit(1);
    }
    Ok(())
}
