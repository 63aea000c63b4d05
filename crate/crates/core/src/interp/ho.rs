//! Big-step evaluator for checked source programs, closures included.

use std::collections::HashMap;
use std::rc::Rc;

use crate::ast::{BinOp, Expr, ExprKind, Lambda, LetDef, Param, TopLevel, UnOp};
use crate::typing::{TypedProgram, CODE_BUILTINS};

use super::value::{Closure, Value};
use super::{binop, builtin, err, match_pattern, stuck, Fuel, RunErrorKind, RunResult};

struct Ho<'p> {
    funs: HashMap<&'p str, &'p LetDef>,
    values: HashMap<String, Value>,
    fuel: Fuel,
}

type Env = Vec<(String, Value)>;

fn lookup<'e>(env: &'e Env, x: &str) -> Option<&'e Value> {
    env.iter().rev().find(|(y, _)| y == x).map(|(_, v)| v)
}

/// `fun p1 -> fun p2 -> ... body` for the parameters after the first.
fn curried_body(params: &[Param], body: &Expr) -> Expr {
    params.iter().rev().fold(body.clone(), |acc, p| {
        let loc = acc.loc;
        Expr::new(
            ExprKind::Lambda(Lambda { spec: None, params: vec![p.clone()], ret: None, body: Box::new(acc) }),
            loc,
        )
    })
}

fn closure(params: &[Param], body: &Expr, env: &Env) -> Value {
    Value::Closure(Rc::new(Closure {
        param: params[0].name.clone(),
        body: curried_body(&params[1..], body),
        env: env.clone(),
    }))
}

impl<'p> Ho<'p> {
    fn global(&self, x: &str) -> RunResult<Value> {
        if let Some(d) = self.funs.get(x) {
            return Ok(closure(&d.params, &d.body, &Vec::new()));
        }
        match self.values.get(x) {
            Some(v) => Ok(v.clone()),
            None => stuck(format!("unbound `{x}`")),
        }
    }

    fn call_def(&mut self, d: &'p LetDef, args: Vec<Value>) -> RunResult<Value> {
        self.fuel.tick()?;
        let mut env: Env = d.params.iter().map(|p| p.name.clone()).zip(args).collect();
        self.eval(&d.body, &mut env)
    }

    fn apply(&mut self, f: Value, a: Value) -> RunResult<Value> {
        match f {
            Value::Closure(c) => {
                self.fuel.tick()?;
                let mut env = c.env.clone();
                env.push((c.param.clone(), a));
                self.eval(&c.body, &mut env)
            }
            other => stuck(format!("applying non-function {other}")),
        }
    }

    fn eval_all(&mut self, xs: &[Expr], env: &mut Env) -> RunResult<Vec<Value>> {
        xs.iter().map(|x| self.eval(x, env)).collect()
    }

    fn app(&mut self, e: &Expr, env: &mut Env) -> RunResult<Value> {
        let mut args = Vec::new();
        let mut head = e;
        while let ExprKind::App(f, a) = &head.kind {
            args.push(&**a);
            head = f;
        }
        args.reverse();
        if let ExprKind::Var(x) = &head.kind {
            if lookup(env, x).is_none() {
                if let Some(&d) = self.funs.get(x.as_str()) {
                    if args.len() >= d.params.len() {
                        let n = d.params.len();
                        let vals = args[..n].iter().map(|a| self.eval(a, env)).collect::<RunResult<Vec<_>>>()?;
                        let mut r = self.call_def(d, vals)?;
                        for a in &args[n..] {
                            let v = self.eval(a, env)?;
                            r = self.apply(r, v)?;
                        }
                        return Ok(r);
                    }
                } else if CODE_BUILTINS.contains(&x.as_str()) && !self.values.contains_key(x) {
                    let vals = args.iter().map(|a| self.eval(a, env)).collect::<RunResult<Vec<_>>>()?;
                    self.fuel.tick()?;
                    return builtin(x, &vals);
                }
            }
        }
        let mut f = self.eval(head, env)?;
        for a in args {
            let v = self.eval(a, env)?;
            f = self.apply(f, v)?;
        }
        Ok(f)
    }

    fn eval(&mut self, e: &Expr, env: &mut Env) -> RunResult<Value> {
        stacker::maybe_grow(64 * 1024, 4 * 1024 * 1024, || self.eval_inner(e, env))
    }

    fn eval_inner(&mut self, e: &Expr, env: &mut Env) -> RunResult<Value> {
        let at = |r: RunResult<Value>| {
            r.map_err(|mut x| {
                x.loc.get_or_insert(e.loc);
                x
            })
        };
        match &e.kind {
            ExprKind::Unit => Ok(Value::Unit),
            ExprKind::Int(n) => Ok(Value::Int(*n)),
            ExprKind::Bool(b) => Ok(Value::Bool(*b)),
            ExprKind::Nil => Ok(Value::nil()),
            ExprKind::Var(x) => match lookup(env, x) {
                Some(v) => Ok(v.clone()),
                None => self.global(x),
            },
            ExprKind::Ctor(c, args) => {
                let vals = self.eval_all(args, env)?;
                Ok(Value::Ctor(c.clone(), vals))
            }
            ExprKind::Tuple(xs) => Ok(Value::Tuple(self.eval_all(xs, env)?)),
            ExprKind::Cons(h, t) => {
                let h = self.eval(h, env)?;
                let t = self.eval(t, env)?;
                Ok(Value::cons(h, t))
            }
            ExprKind::BinOp(BinOp::And, a, b) => match self.eval(a, env)? {
                Value::Bool(false) => Ok(Value::Bool(false)),
                _ => self.eval(b, env),
            },
            ExprKind::BinOp(BinOp::Or, a, b) => match self.eval(a, env)? {
                Value::Bool(true) => Ok(Value::Bool(true)),
                _ => self.eval(b, env),
            },
            ExprKind::BinOp(op, a, b) => {
                let a = self.eval(a, env)?;
                let b = self.eval(b, env)?;
                at(binop(*op, &a, &b))
            }
            ExprKind::UnOp(op, a) => match (op, self.eval(a, env)?) {
                (UnOp::Neg, Value::Int(n)) => Ok(Value::Int(n.wrapping_neg())),
                (UnOp::Not, Value::Bool(b)) => Ok(Value::Bool(!b)),
                (_, v) => at(stuck(format!("bad operand {v}"))),
            },
            ExprKind::Seq(a, b) => {
                self.eval(a, env)?;
                self.eval(b, env)
            }
            ExprKind::If(c, a, b) => match self.eval(c, env)? {
                Value::Bool(true) => self.eval(a, env),
                Value::Bool(false) => self.eval(b, env),
                v => at(stuck(format!("non-boolean condition {v}"))),
            },
            ExprKind::LetIn(d, body) => {
                let v = if d.is_function() {
                    if d.is_rec {
                        return at(stuck(format!("local recursive function `{}`", d.name)));
                    }
                    closure(&d.params, &d.body, env)
                } else {
                    self.eval(&d.body, env)?
                };
                env.push((d.name.clone(), v));
                let r = self.eval(body, env);
                env.pop();
                r
            }
            ExprKind::Match(s, arms) => {
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
                at(err(RunErrorKind::AbsurdReached, None))
            }
            ExprKind::Lambda(l) => Ok(closure(&l.params, &l.body, env)),
            ExprKind::App(..) => self.app(e, env),
        }
    }
}

/// Runs definition `entry` of `p` on `args`. Top-level values are computed
/// first, in program order.
pub fn eval_ho(p: &TypedProgram, entry: &str, args: &[Value], fuel: u64) -> RunResult<Value> {
    let mut ho = Ho { funs: HashMap::new(), values: HashMap::new(), fuel: Fuel(fuel) };
    for item in &p.program.items {
        if let TopLevel::LetDef(d) = item {
            if d.is_function() {
                ho.funs.insert(&d.name, d);
            } else {
                ho.funs.remove(d.name.as_str());
                let v = ho.eval(&d.body, &mut Vec::new())?;
                ho.values.insert(d.name.clone(), v);
            }
        }
    }
    if let Some(&d) = ho.funs.get(entry) {
        if args.len() != d.params.len() {
            return stuck(format!("`{entry}` expects {} arguments, got {}", d.params.len(), args.len()));
        }
        return ho.call_def(d, args.to_vec());
    }
    let mut v = match ho.values.get(entry) {
        Some(v) => v.clone(),
        None => return stuck(format!("no definition `{entry}`")),
    };
    for a in args {
        v = ho.apply(v, a.clone())?;
    }
    Ok(v)
}
