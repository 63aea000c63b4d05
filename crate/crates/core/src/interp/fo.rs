//! Evaluator for defunctionalized programs. There are no closures here:
//! continuation values are ordinary constructors dispatched by the apply
//! functions.

use std::collections::HashMap;

use crate::ast::{BinOp, UnOp};
use crate::defunc::{Callee, FoExpr, FoFun, FoKind, TargetProgram};

use super::value::Value;
use super::{binop, builtin, err, match_pattern, stuck, Fuel, RunErrorKind, RunResult};

struct Fo<'p> {
    funs: HashMap<&'p str, &'p FoFun>,
    applies: Vec<&'p FoFun>,
    fuel: Fuel,
    trace: Option<&'p mut Vec<String>>,
}

type Env = Vec<(String, Value)>;

impl<'p> Fo<'p> {
    fn call(&mut self, f: &'p FoFun, args: Vec<Value>) -> RunResult<Value> {
        self.fuel.tick()?;
        if args.len() != f.params.len() {
            return stuck(format!("`{}` expects {} arguments, got {}", f.name, f.params.len(), args.len()));
        }
        if let Some(t) = self.trace.as_deref_mut() {
            let mut line = f.name.clone();
            for a in &args {
                line.push(' ');
                line.push_str(&a.to_string());
            }
            t.push(line);
        }
        let mut env: Env = f.params.iter().map(|(x, _)| x.clone()).zip(args).collect();
        self.eval(&f.body, &mut env)
    }

    fn callee(&self, c: &Callee) -> RunResult<&'p FoFun> {
        match c {
            Callee::Fun(n) => match self.funs.get(n.as_str()) {
                Some(f) => Ok(f),
                None => stuck(format!("no function `{n}`")),
            },
            Callee::Apply(i) => match self.applies.get(*i) {
                Some(f) => Ok(f),
                None => stuck(format!("no apply function for family {i}")),
            },
            Callee::Builtin(n) => stuck(format!("`{n}` is built in")),
        }
    }

    fn eval_all(&mut self, xs: &'p [FoExpr], env: &mut Env) -> RunResult<Vec<Value>> {
        xs.iter().map(|x| self.eval(x, env)).collect()
    }

    fn eval(&mut self, e: &'p FoExpr, env: &mut Env) -> RunResult<Value> {
        stacker::maybe_grow(64 * 1024, 4 * 1024 * 1024, || self.eval_inner(e, env))
    }

    fn eval_inner(&mut self, e: &'p FoExpr, env: &mut Env) -> RunResult<Value> {
        match &e.kind {
            FoKind::Unit => Ok(Value::Unit),
            FoKind::Int(n) => Ok(Value::Int(*n)),
            FoKind::Bool(b) => Ok(Value::Bool(*b)),
            FoKind::Var(x) => match env.iter().rev().find(|(y, _)| y == x) {
                Some((_, v)) => Ok(v.clone()),
                None => stuck(format!("unbound `{x}`")),
            },
            FoKind::Ctor(c, xs) => Ok(Value::Ctor(c.clone(), self.eval_all(xs, env)?)),
            FoKind::Tuple(xs) => Ok(Value::Tuple(self.eval_all(xs, env)?)),
            FoKind::BinOp(BinOp::And, a, b) => match self.eval(a, env)? {
                Value::Bool(false) => Ok(Value::Bool(false)),
                _ => self.eval(b, env),
            },
            FoKind::BinOp(BinOp::Or, a, b) => match self.eval(a, env)? {
                Value::Bool(true) => Ok(Value::Bool(true)),
                _ => self.eval(b, env),
            },
            FoKind::BinOp(op, a, b) => {
                let a = self.eval(a, env)?;
                let b = self.eval(b, env)?;
                binop(*op, &a, &b)
            }
            FoKind::UnOp(op, a) => match (op, self.eval(a, env)?) {
                (UnOp::Neg, Value::Int(n)) => Ok(Value::Int(n.wrapping_neg())),
                (UnOp::Not, Value::Bool(b)) => Ok(Value::Bool(!b)),
                (_, v) => stuck(format!("bad operand {v}")),
            },
            FoKind::Seq(a, b) => {
                self.eval(a, env)?;
                self.eval(b, env)
            }
            FoKind::Let(x, v, body) => {
                let v = self.eval(v, env)?;
                env.push((x.clone(), v));
                let r = self.eval(body, env);
                env.pop();
                r
            }
            FoKind::If(c, a, b) => match self.eval(c, env)? {
                Value::Bool(true) => self.eval(a, env),
                Value::Bool(false) => self.eval(b, env),
                v => stuck(format!("non-boolean condition {v}")),
            },
            FoKind::Match(s, arms) => {
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
                err(RunErrorKind::AbsurdReached, None)
            }
            FoKind::Call(Callee::Builtin(n), xs) => {
                let vals = self.eval_all(xs, env)?;
                self.fuel.tick()?;
                builtin(n, &vals)
            }
            FoKind::Call(c, xs) => {
                let f = self.callee(c)?;
                let vals = self.eval_all(xs, env)?;
                self.call(f, vals)
            }
            FoKind::Absurd => err(RunErrorKind::AbsurdReached, None),
        }
    }
}

fn run<'p>(
    p: &'p TargetProgram,
    entry: &str,
    args: &[Value],
    fuel: u64,
    trace: Option<&'p mut Vec<String>>,
) -> RunResult<Value> {
    let funs: HashMap<&str, &FoFun> = p.functions.iter().map(|f| (f.name.as_str(), f)).collect();
    let mut applies = Vec::new();
    for fam in &p.families {
        match funs.get(fam.apply.as_str()) {
            Some(f) => applies.push(*f),
            None => return stuck(format!("missing `{}`", fam.apply)),
        }
    }
    let mut fo = Fo { funs, applies, fuel: Fuel(fuel), trace };
    let f = fo.callee(&Callee::Fun(entry.to_string()))?;
    fo.call(f, args.to_vec())
}

/// Runs function `entry` of `p` on `args`.
pub fn eval_fo(p: &TargetProgram, entry: &str, args: &[Value], fuel: u64) -> RunResult<Value> {
    run(p, entry, args, fuel, None)
}

/// Like [`eval_fo`], also recording one line `name arg1 arg2 ...` per call.
pub fn eval_fo_traced(
    p: &TargetProgram,
    entry: &str,
    args: &[Value],
    fuel: u64,
) -> (RunResult<Value>, Vec<String>) {
    let mut trace = Vec::new();
    let r = run(p, entry, args, fuel, Some(&mut trace));
    (r, trace)
}
