//! Run list reversal through both evaluators and print the call trace of
//! the defunctionalized version.
//!
//! cargo run --example trace

use defun_verify::compile;
use defun_verify::interp::{eval_fo_traced, eval_ho, Value, DEFAULT_FUEL};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let c = compile(&std::fs::read_to_string("corpus/reverse.mlg")?)?;
    let input = Value::list([1, 2, 3].map(Value::Int));
    let ho = eval_ho(&c.typed, "reverse", std::slice::from_ref(&input), DEFAULT_FUEL)?;
    let (fo, trace) = eval_fo_traced(&c.target, "reverse", &[input], DEFAULT_FUEL);
    for line in trace {
        println!("{line}");
    }
    println!("source {ho}, target {}", fo?);
    Ok(())
}
