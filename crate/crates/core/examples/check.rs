//! Parse and type-check a program, then list its definitions with their
//! types.
//!
//! cargo run --example check -- corpus/height.mlg

use defun_verify::check_source;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "corpus/height.mlg".into());
    let typed = check_source(&std::fs::read_to_string(&path)?)?;
    for def in typed.program.defs() {
        let params: Vec<String> = def.params.iter().map(|p| p.name.clone()).collect();
        println!("{} {}", def.name, params.join(" "));
    }
    Ok(())
}
