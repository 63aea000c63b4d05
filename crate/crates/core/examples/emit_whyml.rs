//! Print the first-order WhyML module for a program.
//!
//! cargo run --example emit_whyml -- corpus/length.mlg

use defun_verify::compile;
use defun_verify::emit::emit_whyml;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "corpus/length.mlg".into());
    let c = compile(&std::fs::read_to_string(&path)?)?;
    print!("{}", emit_whyml(&c.target));
    Ok(())
}
