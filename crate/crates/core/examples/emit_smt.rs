//! Print the verification conditions of a program as SMT-LIB2 scripts.
//!
//! cargo run --example emit_smt -- corpus/length.mlg

use defun_verify::{compile, verification_conditions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "corpus/length.mlg".into());
    let c = compile(&std::fs::read_to_string(&path)?)?;
    for (vc, script) in verification_conditions(&c)? {
        println!(";;;; {} ({} hypotheses)", vc.name, vc.hypotheses.len());
        println!("{script}");
    }
    Ok(())
}
