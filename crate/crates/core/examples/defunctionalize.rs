//! Defunctionalize a curried lambda and print its continuation families.
//!
//! cargo run --example defunctionalize

use defun_verify::compile;

const SOURCE: &str = "let f (y : int) : int -> int -> int = fun (x : int) (z : int) : int -> x + y\n";

fn main() -> Result<(), defun_verify::Error> {
    let c = compile(SOURCE)?;
    for fam in &c.target.families {
        println!("{}: {} via {} / {}", fam.arrow_ty, fam.kont, fam.apply, fam.post);
        for id in &fam.sites {
            let site = c.target.site(*id);
            let captured: Vec<String> = site.captured.iter().map(|(n, t)| format!("{n} : {t}")).collect();
            println!("  {} captures [{}]", site.ctor, captured.join(", "));
        }
    }
    Ok(())
}
