//! Weakest preconditions over first-order target code and the resulting
//! verification conditions.

use crate::ast::{BinOp, Loc, Ty, UnOp};
use crate::defunc::{Callee, FoExpr, FoFun, FoKind, TargetProgram};

use super::term::{Env, Lower, Term, VcKind};
use super::VcError;

type WResult<T> = Result<T, VcError>;

/// One proof obligation: under `hypotheses`, `goal` holds for all values
/// of `vars`.
#[derive(Clone, Debug, PartialEq)]
pub struct Vc {
    pub name: String,
    /// Function or lemma the obligation comes from.
    pub def: String,
    pub kind: VcKind,
    pub loc: Loc,
    pub vars: Vec<(String, Ty)>,
    pub hypotheses: Vec<Term>,
    pub goal: Term,
}

type Cont<'k, 'p> = &'k dyn Fn(&mut Wp<'p>, Term) -> WResult<Term>;
type ContN<'k, 'p> = &'k dyn Fn(&mut Wp<'p>, Vec<Term>) -> WResult<Term>;

pub struct Wp<'p> {
    pub lower: Lower<'p>,
    target: &'p TargetProgram,
}

fn is_pure(e: &FoExpr) -> bool {
    let mut pure = true;
    e.walk(&mut |x| {
        pure &= !matches!(&x.kind, FoKind::Call(c, _) if !matches!(c, Callee::Builtin(_)))
            && !matches!(x.kind, FoKind::Absurd | FoKind::BinOp(BinOp::Div, ..))
    });
    pure
}

impl<'p> Wp<'p> {
    pub fn new(target: &'p TargetProgram) -> Self {
        Wp { lower: Lower::new(&target.sig), target }
    }

    fn callee(&self, c: &Callee) -> WResult<&'p FoFun> {
        let name = self.target.callee_name(c);
        self.target.function(&name).ok_or_else(|| VcError::Unsupported(format!("call to unknown function `{name}`")))
    }

    fn all(&mut self, es: &[FoExpr], env: &Env, acc: Vec<Term>, k: ContN<'_, 'p>) -> WResult<Term> {
        match es.split_first() {
            None => k(self, acc),
            Some((e, rest)) => self.wp(e, env, &|s, v| {
                let mut acc = acc.clone();
                acc.push(v);
                s.all(rest, env, acc, k)
            }),
        }
    }

    /// `wp(e, k)`, where the continuation `k` builds the postcondition for
    /// the value of `e`.
    pub fn wp(&mut self, e: &FoExpr, env: &Env, k: Cont<'_, 'p>) -> WResult<Term> {
        stacker::maybe_grow(64 * 1024, 4 * 1024 * 1024, || self.wp_inner(e, env, k))
    }

    fn wp_inner(&mut self, e: &FoExpr, env: &Env, k: Cont<'_, 'p>) -> WResult<Term> {
        match &e.kind {
            FoKind::Unit => k(self, Term::Unit),
            FoKind::Int(n) => k(self, Term::Int(*n)),
            FoKind::Bool(b) => k(self, Term::Bool(*b)),
            FoKind::Var(x) => match env.get(x) {
                Some(t) => k(self, t.clone()),
                None => Err(VcError::Type(format!("unbound `{x}` in code"))),
            },
            FoKind::Ctor(c, xs) => {
                let ty = e.ty.clone();
                self.all(xs, env, vec![], &|s, vs| k(s, Term::Ctor(c.clone(), vs, ty.clone())))
            }
            FoKind::Tuple(xs) => self.all(xs, env, vec![], &|s, vs| k(s, Term::Tuple(vs))),
            FoKind::BinOp(op @ (BinOp::And | BinOp::Or), a, b) if !is_pure(b) => {
                let op = *op;
                self.wp(a, env, &|s, ta| {
                    let short = Term::Bool(op == BinOp::Or);
                    let (run_b, skip) = match op {
                        BinOp::And => (ta.clone(), Term::negate(ta)),
                        _ => (Term::negate(ta.clone()), ta),
                    };
                    let long = s.wp(b, env, k)?;
                    let short = k(s, short)?;
                    Ok(Term::and(Term::implies(run_b, long), Term::implies(skip, short)))
                })
            }
            FoKind::BinOp(op, a, b) => {
                let op = *op;
                self.wp(a, env, &|s, ta| {
                    s.wp(b, env, &|s, tb| {
                        let v = Term::Bin(op, Box::new(ta.clone()), Box::new(tb.clone()));
                        let rest = k(s, v)?;
                        if op == BinOp::Div {
                            let nonzero = Term::negate(Term::eq(tb, Term::Int(0)));
                            let pre = Term::Label(VcKind::Precondition { callee: "div".into() }, Box::new(nonzero));
                            return Ok(Term::and(pre, rest));
                        }
                        Ok(rest)
                    })
                })
            }
            FoKind::UnOp(op, a) => {
                let op: UnOp = *op;
                self.wp(a, env, &|s, ta| k(s, Term::Un(op, Box::new(ta))))
            }
            FoKind::Seq(a, b) => self.wp(a, env, &|s, _| s.wp(b, env, k)),
            FoKind::Let(x, v, b) => self.wp(v, env, &|s, tv| {
                let mut env = env.clone();
                env.insert(x.clone(), tv);
                s.wp(b, &env, k)
            }),
            FoKind::If(c, a, b) => self.wp(c, env, &|s, tc| {
                let ta = s.wp(a, env, k)?;
                let tb = s.wp(b, env, k)?;
                Ok(Term::and(Term::implies(tc.clone(), ta), Term::implies(Term::negate(tc), tb)))
            }),
            FoKind::Match(scrut, arms) => self.wp(scrut, env, &|s, ts| {
                let mut earlier: Vec<Term> = Vec::new();
                let mut out = Term::Bool(true);
                for (p, body) in arms {
                    let mut conds = Vec::new();
                    let mut binds = Vec::new();
                    s.lower.pattern(p, &ts, &mut conds, &mut binds)?;
                    let mut env = env.clone();
                    env.extend(binds);
                    let hyp = Term::conj(earlier.iter().cloned().chain(conds.iter().cloned()));
                    out = Term::and(out, Term::implies(hyp, s.wp(body, &env, k)?));
                    if conds.is_empty() {
                        break;
                    }
                    earlier.push(Term::negate(Term::conj(conds)));
                }
                Ok(out)
            }),
            FoKind::Call(Callee::Builtin(n), xs) => {
                let ty = e.ty.clone();
                self.all(xs, env, vec![], &|s, vs| k(s, Term::App(n.clone(), vs, ty.clone())))
            }
            FoKind::Call(c, xs) => {
                let f = self.callee(c)?;
                self.all(xs, env, vec![], &|s, vs| s.call(f, vs, k))
            }
            FoKind::Absurd => Ok(Term::Label(VcKind::Unreachable, Box::new(Term::Bool(false)))),
        }
    }

    /// Requires of `f` at `args`, and for a fresh result satisfying the
    /// ensures, the continuation.
    fn call(&mut self, f: &'p FoFun, args: Vec<Term>, k: Cont<'_, 'p>) -> WResult<Term> {
        let mut env: Env = f.params.iter().map(|(x, _)| x.clone()).zip(args).collect();
        let mut pre = Term::Bool(true);
        for r in &f.requires {
            let t = self.lower.formula(r, &env, Some(&Ty::Bool))?;
            pre = Term::and(pre, Term::Label(VcKind::Precondition { callee: f.name.clone() }, Box::new(t)));
        }
        let r = self.lower.names.fresh("r");
        env.insert("result".into(), Term::Var(r.clone(), f.ret.clone()));
        let mut ens = Term::Bool(true);
        for q in &f.ensures {
            ens = Term::and(ens, self.lower.formula(q, &env, Some(&Ty::Bool))?);
        }
        let rest = k(self, Term::Var(r.clone(), f.ret.clone()))?;
        Ok(Term::and(pre, Term::forall(vec![(r, f.ret.clone())], Term::implies(ens, rest))))
    }

    /// The full obligation of `f`: its requires imply the wp of its body
    /// against its ensures.
    pub fn function(&mut self, f: &'p FoFun) -> WResult<Term> {
        for (x, _) in &f.params {
            self.lower.names.reserve(x);
        }
        let env: Env = f.params.iter().map(|(x, t)| (x.clone(), Term::Var(x.clone(), t.clone()))).collect();
        let mut req = Term::Bool(true);
        for r in &f.requires {
            req = Term::and(req, self.lower.formula(r, &env, Some(&Ty::Bool))?);
        }
        let body = self.wp(&f.body, &env, &|s, v| {
            let mut env = env.clone();
            env.insert("result".into(), v);
            let mut goal = Term::Bool(true);
            for q in &f.ensures {
                let t = s.lower.formula(q, &env, Some(&Ty::Bool))?;
                goal = Term::and(goal, Term::Label(VcKind::Postcondition, Box::new(t)));
            }
            Ok(goal)
        })?;
        Ok(Term::implies(req, body))
    }
}

/// Splits a goal into independent obligations along conjunctions,
/// keeping the implications and quantifiers above each conjunct.
pub fn split(t: Term, kind: &VcKind, out: &mut Vec<(VcKind, Term)>) {
    match t {
        Term::Bool(true) => {}
        Term::Label(k, g) => split(*g, &k, out),
        Term::Bin(BinOp::And, a, b) => {
            split(*a, kind, out);
            split(*b, kind, out);
        }
        Term::Implies(h, g) => wrap(*g, kind, out, &|g| Term::Implies(h.clone(), Box::new(g))),
        Term::Forall(bs, g) => wrap(*g, kind, out, &|g| Term::Forall(bs.clone(), Box::new(g))),
        Term::Let(x, v, g) => wrap(*g, kind, out, &|g| Term::Let(x.clone(), v.clone(), Box::new(g))),
        t => out.push((kind.clone(), t)),
    }
}

fn wrap(g: Term, kind: &VcKind, out: &mut Vec<(VcKind, Term)>, f: &dyn Fn(Term) -> Term) {
    let mut inner = Vec::new();
    split(g, kind, &mut inner);
    out.extend(inner.into_iter().map(|(k, g)| (k, f(g))));
}

/// Every obligation of `t`: lemmas first, each assumed by the obligations
/// after it, then one obligation per postcondition path, call
/// precondition and unreachable branch of each function, in emission
/// order.
pub fn generate_vcs(t: &TargetProgram) -> Result<Vec<Vc>, VcError> {
    let mut out = Vec::new();
    let mut lemmas: Vec<Term> = Vec::new();
    for l in &t.lemmas {
        let mut wp = Wp::new(t);
        let goal = wp.lower.formula(&l.formula, &Env::new(), Some(&Ty::Bool))?;
        out.push(Vc {
            name: format!("vc_{}_0", l.name),
            def: l.name.clone(),
            kind: VcKind::Lemma,
            loc: l.loc,
            vars: vec![],
            hypotheses: lemmas.clone(),
            goal: goal.clone(),
        });
        lemmas.push(goal);
    }
    for name in t.groups.iter().flatten() {
        let f = t.function(name).ok_or_else(|| VcError::Unsupported(format!("unknown function `{name}`")))?;
        let mut wp = Wp::new(t);
        let obligation = wp.function(f)?;
        let mut goals = Vec::new();
        split(obligation, &VcKind::Postcondition, &mut goals);
        for (i, (kind, goal)) in goals.into_iter().enumerate() {
            out.push(Vc {
                name: format!("vc_{}_{i}", f.name),
                def: f.name.clone(),
                kind,
                loc: f.loc,
                vars: f.params.clone(),
                hypotheses: lemmas.clone(),
                goal,
            });
        }
    }
    Ok(out)
}
