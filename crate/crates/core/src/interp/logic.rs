//! Executable fragment of the specification language: formulas without
//! quantifiers or `post`, over concrete values. Used to filter random
//! inputs on preconditions and to check postconditions at run time.

use std::collections::HashMap;

use crate::ast::{BinOp, Formula, LogicDecl, UnOp};

use super::value::Value;
use super::{binop, builtin, match_pattern};

pub struct Logic<'p> {
    decls: HashMap<&'p str, &'p LogicDecl>,
    depth: usize,
}

const MAX_DEPTH: usize = 10_000;

impl<'p> Logic<'p> {
    pub fn new(decls: &'p [LogicDecl]) -> Self {
        Logic { decls: decls.iter().map(|d| (d.name.as_str(), d)).collect(), depth: 0 }
    }

    /// The value of `f` under `env`, or `None` when `f` is outside the
    /// executable fragment or mentions an unknown or uninterpreted symbol.
    pub fn eval(&mut self, f: &Formula, env: &mut Vec<(String, Value)>) -> Option<Value> {
        stacker::maybe_grow(64 * 1024, 4 * 1024 * 1024, || self.eval_inner(f, env))
    }

    /// `Some(true)` or `Some(false)` for an executable proposition.
    pub fn holds(&mut self, f: &Formula, env: &mut Vec<(String, Value)>) -> Option<bool> {
        match self.eval(f, env)? {
            Value::Bool(b) => Some(b),
            _ => None,
        }
    }

    fn eval_inner(&mut self, f: &Formula, env: &mut Vec<(String, Value)>) -> Option<Value> {
        Some(match f {
            Formula::Var(x) => match env.iter().rev().find(|(y, _)| y == x) {
                Some((_, v)) => v.clone(),
                None => return self.call(x, vec![]),
            },
            Formula::Int(n) => Value::Int(*n),
            Formula::True => Value::Bool(true),
            Formula::False => Value::Bool(false),
            Formula::Unit => Value::Unit,
            Formula::Ctor(c, xs) => {
                let vals = xs.iter().map(|x| self.eval(x, env)).collect::<Option<Vec<_>>>()?;
                // `C (a, b)` packs the fields as one tuple.
                match vals.as_slice() {
                    [Value::Tuple(inner)] if matches!(xs.as_slice(), [Formula::Tuple(_)]) => {
                        Value::Ctor(c.clone(), inner.clone())
                    }
                    _ => Value::Ctor(c.clone(), vals),
                }
            }
            Formula::Tuple(xs) => Value::Tuple(xs.iter().map(|x| self.eval(x, env)).collect::<Option<_>>()?),
            Formula::App(g, xs) => {
                let vals = xs.iter().map(|x| self.eval(x, env)).collect::<Option<Vec<_>>>()?;
                return self.call(g, vals);
            }
            Formula::Bin(BinOp::And, a, b) => match self.eval(a, env)? {
                Value::Bool(false) => Value::Bool(false),
                _ => self.eval(b, env)?,
            },
            Formula::Bin(BinOp::Or, a, b) => match self.eval(a, env)? {
                Value::Bool(true) => Value::Bool(true),
                _ => self.eval(b, env)?,
            },
            Formula::Bin(op, a, b) => {
                let a = self.eval(a, env)?;
                let b = self.eval(b, env)?;
                // Logical division by zero is unspecified.
                binop(*op, &a, &b).ok()?
            }
            Formula::Un(UnOp::Not, a) => match self.eval(a, env)? {
                Value::Bool(b) => Value::Bool(!b),
                _ => return None,
            },
            Formula::Un(UnOp::Neg, a) => match self.eval(a, env)? {
                Value::Int(n) => Value::Int(n.wrapping_neg()),
                _ => return None,
            },
            Formula::Implies(a, b) => match self.eval(a, env)? {
                Value::Bool(false) => Value::Bool(true),
                _ => self.eval(b, env)?,
            },
            Formula::Let(x, v, b) => {
                let v = self.eval(v, env)?;
                env.push((x.clone(), v));
                let r = self.eval(b, env);
                env.pop();
                r?
            }
            Formula::Match(s, arms) => {
                let v = self.eval(s, env)?;
                for (p, body) in arms {
                    let mut binds = Vec::new();
                    if match_pattern(p, &v, &mut binds) {
                        let n = env.len();
                        env.extend(binds);
                        let r = self.eval(body, env);
                        env.truncate(n);
                        return r;
                    }
                }
                return None;
            }
            Formula::Labeled(_, f) => self.eval(f, env)?,
            Formula::Forall(..) | Formula::PostMeta { .. } => return None,
        })
    }

    fn call(&mut self, g: &str, args: Vec<Value>) -> Option<Value> {
        if let Some(d) = self.decls.get(g).copied() {
            if d.params.len() != args.len() || self.depth >= MAX_DEPTH {
                return None;
            }
            let body = d.body.as_ref()?;
            let mut env: Vec<(String, Value)> = d.params.iter().map(|(x, _)| x.clone()).zip(args).collect();
            self.depth += 1;
            let r = self.eval(body, &mut env);
            self.depth -= 1;
            return r;
        }
        match (g, args.as_slice()) {
            ("length", [l]) => Some(Value::Int(l.as_list()?.len() as i64)),
            ("height", [t]) => height(t).map(Value::Int),
            ("max" | "min" | "abs", _) => builtin(g, &args).ok(),
            _ => None,
        }
    }
}

fn height(t: &Value) -> Option<i64> {
    match t {
        Value::Ctor(c, xs) if c == "Empty" && xs.is_empty() => Some(0),
        Value::Ctor(c, xs) if c == "Node" && xs.len() == 3 => Some(1 + height(&xs[0])?.max(height(&xs[2])?)),
        _ => None,
    }
}
