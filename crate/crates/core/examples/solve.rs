//! Discharge every verification condition of a program with the solver
//! named by SMT_SOLVER (default /usr/local/bin/z3).
//!
//! cargo run --example solve -- corpus/height.mlg

use std::time::{Duration, Instant};

use defun_verify::vcgen::{run_solver, solver_path};
use defun_verify::{compile, verification_conditions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "corpus/height.mlg".into());
    let solver = solver_path().ok_or("no solver: set SMT_SOLVER")?;
    let c = compile(&std::fs::read_to_string(&path)?)?;
    for (vc, script) in verification_conditions(&c)? {
        let start = Instant::now();
        let answer = run_solver(&solver, &script, Duration::from_secs(5));
        println!("{:<24} {:<8} {:>6} ms", vc.name, answer.as_str(), start.elapsed().as_millis());
    }
    Ok(())
}
