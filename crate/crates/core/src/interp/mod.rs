//! Reference evaluators for source and target programs, a random input
//! generator, and the equivalence harness comparing the two.

pub mod equiv;
pub mod fo;
pub mod gen;
pub mod ho;
pub mod logic;
pub mod value;

use crate::ast::{BinOp, Loc, Pattern};

pub use equiv::{equiv_check, Counterexample, EquivError, EquivReport};
pub use fo::{eval_fo, eval_fo_traced};
pub use ho::eval_ho;
pub use value::Value;

pub const DEFAULT_FUEL: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RunErrorKind {
    AbsurdReached,
    DivisionByZero,
    FuelExhausted,
    Stuck(String),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{}{}", match .loc { Some(l) => format!("{l}: "), None => String::new() }, .kind.describe())]
pub struct RunError {
    pub kind: RunErrorKind,
    pub loc: Option<Loc>,
}

impl RunErrorKind {
    pub fn describe(&self) -> String {
        match self {
            RunErrorKind::AbsurdReached => "unreachable branch reached".into(),
            RunErrorKind::DivisionByZero => "division by zero".into(),
            RunErrorKind::FuelExhausted => "step budget exhausted".into(),
            RunErrorKind::Stuck(why) => format!("evaluation stuck: {why}"),
        }
    }

    /// Same kind, ignoring the detail message.
    pub fn same_kind(&self, other: &RunErrorKind) -> bool {
        std::mem::discriminant(self) == std::mem::discriminant(other)
    }
}

pub type RunResult<T> = Result<T, RunError>;

pub(crate) fn err<T>(kind: RunErrorKind, loc: Option<Loc>) -> RunResult<T> {
    Err(RunError { kind, loc })
}

pub(crate) fn stuck<T>(why: impl Into<String>) -> RunResult<T> {
    err(RunErrorKind::Stuck(why.into()), None)
}

/// Step budget; one unit per function application.
pub(crate) struct Fuel(pub u64);

impl Fuel {
    pub fn tick(&mut self) -> RunResult<()> {
        if self.0 == 0 {
            return err(RunErrorKind::FuelExhausted, None);
        }
        self.0 -= 1;
        Ok(())
    }
}

/// Binds the variables of `p` when it matches `v`.
pub fn match_pattern(p: &Pattern, v: &Value, out: &mut Vec<(String, Value)>) -> bool {
    match (p, v) {
        (Pattern::Wildcard, _) => true,
        (Pattern::Var(x, _), v) => {
            out.push((x.clone(), v.clone()));
            true
        }
        (Pattern::Int(n), Value::Int(m)) => n == m,
        (Pattern::Nil, Value::Ctor(c, xs)) => c == "Nil" && xs.is_empty(),
        (Pattern::Cons(h, t), Value::Ctor(c, xs)) if c == "Cons" && xs.len() == 2 => {
            match_pattern(h, &xs[0], out) && match_pattern(t, &xs[1], out)
        }
        (Pattern::Ctor(c, ps), Value::Ctor(d, xs)) => {
            if c != d {
                return false;
            }
            // A single pattern may stand for all fields packed as a tuple.
            match (ps.len(), xs.len()) {
                (a, b) if a == b => ps.iter().zip(xs).all(|(p, x)| match_pattern(p, x, out)),
                (1, _) => match_pattern(&ps[0], &Value::Tuple(xs.clone()), out),
                _ => false,
            }
        }
        (Pattern::Tuple(ps), Value::Unit) => ps.is_empty(),
        (Pattern::Tuple(ps), Value::Tuple(xs)) => {
            ps.len() == xs.len() && ps.iter().zip(xs).all(|(p, x)| match_pattern(p, x, out))
        }
        _ => false,
    }
}

/// Integer and comparison operators shared by both evaluators; `&&` and
/// `||` are short-circuited by the callers.
pub fn binop(op: BinOp, a: &Value, b: &Value) -> RunResult<Value> {
    use Value::{Bool, Int};
    Ok(match (op, a, b) {
        (BinOp::Add, Int(x), Int(y)) => Int(x.wrapping_add(*y)),
        (BinOp::Sub, Int(x), Int(y)) => Int(x.wrapping_sub(*y)),
        (BinOp::Mul, Int(x), Int(y)) => Int(x.wrapping_mul(*y)),
        (BinOp::Div, Int(_), Int(0)) => return err(RunErrorKind::DivisionByZero, None),
        (BinOp::Div, Int(x), Int(y)) => Int(x.wrapping_div(*y)),
        (BinOp::Eq, a, b) => Bool(a == b),
        (BinOp::Ne, a, b) => Bool(a != b),
        (BinOp::Lt, Int(x), Int(y)) => Bool(x < y),
        (BinOp::Le, Int(x), Int(y)) => Bool(x <= y),
        (BinOp::Gt, Int(x), Int(y)) => Bool(x > y),
        (BinOp::Ge, Int(x), Int(y)) => Bool(x >= y),
        (BinOp::And, Bool(x), Bool(y)) => Bool(*x && *y),
        (BinOp::Or, Bool(x), Bool(y)) => Bool(*x || *y),
        _ => return stuck(format!("operator {} on {a} and {b}", op.symbol())),
    })
}

/// `max`, `min` and `abs`.
pub fn builtin(name: &str, args: &[Value]) -> RunResult<Value> {
    use Value::Int;
    Ok(match (name, args) {
        ("max", [Int(a), Int(b)]) => Int(*a.max(b)),
        ("min", [Int(a), Int(b)]) => Int(*a.min(b)),
        ("abs", [Int(a)]) => Int(a.wrapping_abs()),
        _ => return stuck(format!("bad call to built-in `{name}`")),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compile;

    fn ints(xs: &[i64]) -> Value {
        Value::list(xs.iter().map(|&n| Value::Int(n)))
    }

    fn exp_const(n: i64) -> Value {
        Value::Ctor("Const".into(), vec![Value::Int(n)])
    }

    fn exp_sub(a: Value, b: Value) -> Value {
        Value::Ctor("Sub".into(), vec![a, b])
    }

    #[test]
    fn reverse_both_sides() {
        let c = compile(include_str!("../../corpus/reverse.mlg")).unwrap();
        let args = [ints(&[1, 2, 3])];
        assert_eq!(eval_ho(&c.typed, "reverse", &args, DEFAULT_FUEL), Ok(ints(&[3, 2, 1])));
        assert_eq!(eval_fo(&c.target, "reverse", &args, DEFAULT_FUEL), Ok(ints(&[3, 2, 1])));
    }

    #[test]
    fn reverse_trace_shape() {
        let c = compile(include_str!("../../corpus/reverse.mlg")).unwrap();
        let (r, trace) = eval_fo_traced(&c.target, "reverse", &[ints(&[1, 2])], DEFAULT_FUEL);
        assert_eq!(r, Ok(ints(&[2, 1])));
        assert_eq!(
            trace,
            [
                "reverse [1;2]",
                "reverse_aux_cps [1;2] K1",
                "reverse_aux_cps [2] K0(1, K1)",
                "reverse_aux_cps [] K0(2, K0(1, K1))",
                "apply0 K0(2, K0(1, K1)) []",
                "apply0 K0(1, K1) []",
                "apply0 K1 []",
            ]
        );
    }

    #[test]
    fn interp_reduces_nested_subtraction() {
        let c = compile(include_str!("../../corpus/interp.mlg")).unwrap();
        let e = exp_sub(exp_const(5), exp_sub(exp_const(2), exp_const(1)));
        assert_eq!(eval_ho(&c.typed, "red", std::slice::from_ref(&e), DEFAULT_FUEL), Ok(Value::Int(4)));
        assert_eq!(eval_fo(&c.target, "red", &[e], DEFAULT_FUEL), Ok(Value::Int(4)));
    }

    #[test]
    fn height_of_small_tree() {
        let c = compile(include_str!("../../corpus/height.mlg")).unwrap();
        let leaf = |n| Value::Ctor("Node".into(), vec![Value::Ctor("Empty".into(), vec![]), Value::Int(n), Value::Ctor("Empty".into(), vec![])]);
        let t = Value::Ctor("Node".into(), vec![leaf(1), Value::Int(2), Value::Ctor("Empty".into(), vec![])]);
        assert_eq!(eval_ho(&c.typed, "height_tree_cps", std::slice::from_ref(&t), DEFAULT_FUEL), Ok(Value::Int(2)));
        assert_eq!(eval_fo(&c.target, "height_tree_cps", &[t], DEFAULT_FUEL), Ok(Value::Int(2)));
    }

    #[test]
    fn fuel_runs_out() {
        let c = compile(include_str!("../../corpus/length.mlg")).unwrap();
        let r = eval_ho(&c.typed, "len", &[ints(&[1; 10])], 5);
        assert_eq!(r.unwrap_err().kind, RunErrorKind::FuelExhausted);
    }

    #[test]
    fn corpus_equivalent_on_random_inputs() {
        for (src, entry) in [
            (include_str!("../../corpus/reverse.mlg"), "reverse"),
            (include_str!("../../corpus/length.mlg"), "len"),
            (include_str!("../../corpus/height.mlg"), "height_tree_cps"),
            (include_str!("../../corpus/interp.mlg"), "red"),
        ] {
            let c = compile(src).unwrap();
            let r = equiv_check(&c, entry, 7, 100, DEFAULT_FUEL).unwrap();
            assert!(r.passed(), "{entry}: {r:?}");
            assert_eq!(r.agreed, 100, "{entry}: {r:?}");
            assert_eq!(r.ensures_checked > 0, entry != "reverse", "{entry}: {r:?}");
        }
    }
}
