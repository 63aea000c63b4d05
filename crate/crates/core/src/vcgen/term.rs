//! Typed first-order terms for verification conditions, and their
//! construction from specification formulas.

use std::collections::{HashMap, HashSet};

use crate::ast::{BinOp, Formula, Pattern, Ty, UnOp};
use crate::typing::Signature;

use super::VcError;

/// Obligation kind attached to a goal during WP.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VcKind {
    Postcondition,
    Precondition { callee: String },
    Unreachable,
    Lemma,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Term {
    Var(String, Ty),
    Int(i64),
    Bool(bool),
    Unit,
    /// Constructor application at the given instance type.
    Ctor(String, Vec<Term>, Ty),
    Tuple(Vec<Term>),
    /// Field `i` of constructor `ctor` (`None` for a tuple component).
    Sel(Option<String>, usize, Box<Term>, Ty),
    /// Constructor test.
    Is(String, Box<Term>),
    /// Logic symbol or built-in function application, with its result type.
    App(String, Vec<Term>, Ty),
    Bin(BinOp, Box<Term>, Box<Term>),
    Un(UnOp, Box<Term>),
    Implies(Box<Term>, Box<Term>),
    Forall(Vec<(String, Ty)>, Box<Term>),
    Let(String, Box<Term>, Box<Term>),
    Ite(Box<Term>, Box<Term>, Box<Term>),
    Label(VcKind, Box<Term>),
}

impl Term {
    pub fn ty(&self) -> Ty {
        match self {
            Term::Var(_, t) | Term::Ctor(_, _, t) | Term::Sel(_, _, _, t) | Term::App(_, _, t) => t.clone(),
            Term::Int(_) => Ty::Int,
            Term::Unit => Ty::Unit,
            Term::Tuple(xs) => Ty::Tuple(xs.iter().map(Term::ty).collect()),
            Term::Bin(op, ..) if op.is_arith() => Ty::Int,
            Term::Un(UnOp::Neg, _) => Ty::Int,
            Term::Let(_, _, b) | Term::Label(_, b) => b.ty(),
            Term::Ite(_, a, _) => a.ty(),
            _ => Ty::Bool,
        }
    }

    pub fn and(a: Term, b: Term) -> Term {
        match (a, b) {
            (Term::Bool(true), x) | (x, Term::Bool(true)) => x,
            (a, b) => Term::Bin(BinOp::And, Box::new(a), Box::new(b)),
        }
    }

    pub fn conj(items: impl IntoIterator<Item = Term>) -> Term {
        items.into_iter().fold(Term::Bool(true), Term::and)
    }

    pub fn implies(h: Term, g: Term) -> Term {
        match (h, g) {
            (Term::Bool(true), g) => g,
            (_, Term::Bool(true)) => Term::Bool(true),
            (h, g) => Term::Implies(Box::new(h), Box::new(g)),
        }
    }

    pub fn negate(a: Term) -> Term {
        Term::Un(UnOp::Not, Box::new(a))
    }

    pub fn eq(a: Term, b: Term) -> Term {
        Term::Bin(BinOp::Eq, Box::new(a), Box::new(b))
    }

    pub fn forall(bs: Vec<(String, Ty)>, body: Term) -> Term {
        match body {
            Term::Bool(true) => Term::Bool(true),
            body if bs.is_empty() => body,
            body => Term::Forall(bs, Box::new(body)),
        }
    }

    /// Pre-order walk.
    pub fn walk(&self, f: &mut dyn FnMut(&Term)) {
        f(self);
        match self {
            Term::Ctor(_, xs, _) | Term::Tuple(xs) | Term::App(_, xs, _) => xs.iter().for_each(|x| x.walk(f)),
            Term::Sel(_, _, x, _) | Term::Is(_, x) | Term::Un(_, x) | Term::Forall(_, x) | Term::Label(_, x) => {
                x.walk(f)
            }
            Term::Bin(_, a, b) | Term::Implies(a, b) | Term::Let(_, a, b) => {
                a.walk(f);
                b.walk(f);
            }
            Term::Ite(c, a, b) => {
                c.walk(f);
                a.walk(f);
                b.walk(f);
            }
            Term::Var(..) | Term::Int(_) | Term::Bool(_) | Term::Unit => {}
        }
    }
}

/// Generator of binder names unique within one verification condition.
#[derive(Clone, Debug, Default)]
pub struct Names {
    used: HashSet<String>,
}

impl Names {
    pub fn reserve(&mut self, name: &str) {
        self.used.insert(name.to_string());
    }

    pub fn fresh(&mut self, base: &str) -> String {
        let mut name = base.to_string();
        let mut i = 0;
        while self.used.contains(&name) {
            i += 1;
            name = format!("{base}_{i}");
        }
        self.used.insert(name.clone());
        name
    }
}

pub type Env = HashMap<String, Term>;

/// Matches `pattern`, which may mention type parameters, against
/// `actual`, extending the assignment `map`.
fn unify(pattern: &Ty, actual: &Ty, map: &mut HashMap<String, Ty>) -> bool {
    match (pattern, actual) {
        (Ty::Param(p), t) => match map.get(p) {
            Some(u) => u == t,
            None => {
                map.insert(p.clone(), t.clone());
                true
            }
        },
        (Ty::Named(n, xs), Ty::Named(m, ys)) => {
            n == m && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| unify(x, y, map))
        }
        (Ty::Tuple(xs), Ty::Tuple(ys)) => xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| unify(x, y, map)),
        (Ty::Arrow(a, b), Ty::Arrow(c, d)) => unify(a, c, map) && unify(b, d, map),
        (a, b) => a == b,
    }
}

/// Field types of the instance `ty`, viewing a tuple as its one
/// constructor.
pub fn fields_of(sig: &Signature, ctor: Option<&str>, ty: &Ty) -> Option<Vec<Ty>> {
    match (ctor, ty) {
        (None, Ty::Tuple(ts)) => Some(ts.clone()),
        (Some(c), Ty::Named(_, args)) => sig.ctor_fields(c, args),
        _ => None,
    }
}

/// Translation of specification formulas into [`Term`]s under a signature.
pub struct Lower<'s> {
    pub sig: &'s Signature,
    pub names: Names,
}

type LResult<T> = Result<T, VcError>;

fn need_type(what: &str) -> VcError {
    VcError::Type(format!("cannot determine the type of `{what}`"))
}

impl<'s> Lower<'s> {
    pub fn new(sig: &'s Signature) -> Self {
        Lower { sig, names: Names::default() }
    }

    /// Conditions and bindings under which `p` matches `s`.
    pub fn pattern(&self, p: &Pattern, s: &Term, conds: &mut Vec<Term>, binds: &mut Vec<(String, Term)>) -> LResult<()> {
        match p {
            Pattern::Wildcard => {}
            Pattern::Var(x, _) => binds.push((x.clone(), s.clone())),
            Pattern::Int(n) => conds.push(Term::eq(s.clone(), Term::Int(*n))),
            Pattern::Nil => conds.push(Term::Is("Nil".into(), Box::new(s.clone()))),
            Pattern::Cons(h, t) => self.ctor_pattern("Cons", &[(**h).clone(), (**t).clone()], s, conds, binds)?,
            Pattern::Ctor(c, ps) => self.ctor_pattern(c, ps, s, conds, binds)?,
            Pattern::Tuple(ps) if ps.is_empty() => {}
            Pattern::Tuple(ps) => {
                let ty = s.ty();
                let fields = fields_of(self.sig, None, &ty).ok_or_else(|| VcError::Type(format!("tuple pattern against {ty}")))?;
                for (i, (p, f)) in ps.iter().zip(fields).enumerate() {
                    self.pattern(p, &Term::Sel(None, i, Box::new(s.clone()), f), conds, binds)?;
                }
            }
        }
        Ok(())
    }

    fn ctor_pattern(
        &self,
        c: &str,
        ps: &[Pattern],
        s: &Term,
        conds: &mut Vec<Term>,
        binds: &mut Vec<(String, Term)>,
    ) -> LResult<()> {
        let ty = s.ty();
        let fields = fields_of(self.sig, Some(c), &ty).ok_or_else(|| VcError::Type(format!("pattern {c} against {ty}")))?;
        conds.push(Term::Is(c.into(), Box::new(s.clone())));
        let sels: Vec<Term> =
            fields.iter().enumerate().map(|(i, f)| Term::Sel(Some(c.into()), i, Box::new(s.clone()), f.clone())).collect();
        match (ps.len(), sels.len()) {
            (a, b) if a == b => {
                for (p, sel) in ps.iter().zip(&sels) {
                    self.pattern(p, sel, conds, binds)?;
                }
            }
            (1, _) => self.pattern(&ps[0], &Term::Tuple(sels), conds, binds)?,
            _ => return Err(VcError::Type(format!("wrong number of fields in pattern {c}"))),
        }
        Ok(())
    }

    /// Chain of `ite` over match arms, first match wins; the last arm is
    /// the default.
    pub fn match_chain(&self, arms: Vec<(Vec<Term>, Term)>) -> Term {
        let mut arms = arms.into_iter().rev();
        let Some((_, last)) = arms.next() else { return Term::Bool(true) };
        arms.fold(last, |acc, (conds, body)| match conds.is_empty() {
            true => body,
            false => Term::Ite(Box::new(Term::conj(conds)), Box::new(body), Box::new(acc)),
        })
    }

    fn logic_sig(&self, g: &str) -> LResult<(Vec<Ty>, Ty)> {
        let l = self.sig.logic.get(g).ok_or_else(|| VcError::Type(format!("unknown logic symbol `{g}`")))?;
        let ret = if l.predicate { Ty::Bool } else { l.ret.clone() };
        Ok((l.params.clone(), ret))
    }

    /// Arguments lowered against parameter types that may mention type
    /// parameters; returns them with the parameter assignment.
    fn args(
        &mut self,
        params: &[Ty],
        args: &[Formula],
        env: &Env,
        map: &mut HashMap<String, Ty>,
    ) -> LResult<Vec<Term>> {
        let mut out: Vec<Option<Term>> = vec![None; args.len()];
        // Two passes: arguments whose type is known first, so that the
        // others (such as `Nil`) can be checked against the result.
        for pass in 0..2 {
            for (i, (p, a)) in params.iter().zip(args).enumerate() {
                if out[i].is_some() {
                    continue;
                }
                let expected = p.contains_param().then(|| p.subst_params(map)).filter(|t| !t.contains_param());
                let expected = if p.contains_param() { expected } else { Some(p.clone()) };
                match self.formula(a, env, expected.as_ref()) {
                    Ok(t) => {
                        if !unify(p, &t.ty(), map) {
                            return Err(VcError::Type(format!("argument of type {} where {p} is expected", t.ty())));
                        }
                        out[i] = Some(t);
                    }
                    Err(VcError::NeedType(_)) if pass == 0 => {}
                    Err(e) => return Err(e),
                }
            }
        }
        Ok(out.into_iter().map(|t| t.expect("second pass fills every argument")).collect())
    }

    /// Lowers `f` with free variables resolved through `env` and, when
    /// given, the expected type used to resolve polymorphic constructors.
    pub fn formula(&mut self, f: &Formula, env: &Env, expected: Option<&Ty>) -> LResult<Term> {
        Ok(match f {
            Formula::Var(x) => match env.get(x) {
                Some(t) => t.clone(),
                None if self.sig.ctors.contains_key(x) => return self.formula(&Formula::Ctor(x.clone(), vec![]), env, expected),
                None => {
                    let (params, ret) = self.logic_sig(x).map_err(|_| VcError::Type(format!("unbound `{x}`")))?;
                    if !params.is_empty() {
                        return Err(VcError::Type(format!("`{x}` used without arguments")));
                    }
                    Term::App(x.clone(), vec![], ret)
                }
            },
            Formula::Int(n) => Term::Int(*n),
            Formula::True => Term::Bool(true),
            Formula::False => Term::Bool(false),
            Formula::Unit => Term::Unit,
            Formula::Ctor(c, args) => {
                let info = self.sig.ctors.get(c).ok_or_else(|| VcError::Type(format!("unknown constructor `{c}`")))?.clone();
                let args: Vec<Formula> = match args.as_slice() {
                    [Formula::Tuple(xs)] if info.fields.len() > 1 => xs.clone(),
                    _ => args.clone(),
                };
                let mut map = HashMap::new();
                if let Some(Ty::Named(n, targs)) = expected {
                    if *n == info.ty_name {
                        map.extend(info.params.iter().cloned().zip(targs.iter().cloned()));
                    }
                }
                let terms = self.args(&info.fields, &args, env, &mut map)?;
                if info.params.iter().any(|p| !map.contains_key(p)) {
                    return Err(VcError::NeedType(c.clone()));
                }
                let ty = Ty::Named(info.ty_name.clone(), info.params.iter().map(|p| map[p].clone()).collect());
                Term::Ctor(c.clone(), terms, ty)
            }
            Formula::Tuple(xs) => {
                let exp: Vec<Option<&Ty>> = match expected {
                    Some(Ty::Tuple(ts)) if ts.len() == xs.len() => ts.iter().map(Some).collect(),
                    _ => vec![None; xs.len()],
                };
                Term::Tuple(xs.iter().zip(exp).map(|(x, t)| self.formula(x, env, t)).collect::<LResult<_>>()?)
            }
            Formula::App(g, args) if args.is_empty() => self.formula(&Formula::Var(g.clone()), env, expected)?,
            Formula::App(g, args) => {
                let (params, ret) = self.logic_sig(g)?;
                if params.len() != args.len() {
                    return Err(VcError::Type(format!("`{g}` applied to {} arguments", args.len())));
                }
                let mut map = HashMap::new();
                let terms = self.args(&params, args, env, &mut map)?;
                Term::App(g.clone(), terms, ret.subst_params(&map))
            }
            Formula::Bin(op, a, b) if matches!(op, BinOp::Eq | BinOp::Ne) => {
                let (ta, tb) = match self.formula(a, env, None) {
                    Ok(ta) => {
                        let tb = self.formula(b, env, Some(&ta.ty()))?;
                        (ta, tb)
                    }
                    Err(VcError::NeedType(_)) => {
                        let tb = self.formula(b, env, None)?;
                        let ta = self.formula(a, env, Some(&tb.ty()))?;
                        (ta, tb)
                    }
                    Err(e) => return Err(e),
                };
                Term::Bin(*op, Box::new(ta), Box::new(tb))
            }
            Formula::Bin(op, a, b) => {
                let t = if op.is_logical() { Ty::Bool } else { Ty::Int };
                let ta = self.formula(a, env, Some(&t))?;
                let tb = self.formula(b, env, Some(&t))?;
                Term::Bin(*op, Box::new(ta), Box::new(tb))
            }
            Formula::Un(op, a) => {
                let t = if *op == UnOp::Not { Ty::Bool } else { Ty::Int };
                Term::Un(*op, Box::new(self.formula(a, env, Some(&t))?))
            }
            Formula::Implies(a, b) => Term::Implies(
                Box::new(self.formula(a, env, Some(&Ty::Bool))?),
                Box::new(self.formula(b, env, Some(&Ty::Bool))?),
            ),
            Formula::Forall(bs, body) => {
                let mut env = env.clone();
                let mut vars = Vec::new();
                for b in bs {
                    let ty = b.ty.clone().ok_or_else(|| need_type(&b.name))?;
                    let n = self.names.fresh(&b.name);
                    env.insert(b.name.clone(), Term::Var(n.clone(), ty.clone()));
                    vars.push((n, ty));
                }
                Term::forall(vars, self.formula(body, &env, Some(&Ty::Bool))?)
            }
            Formula::Let(x, v, body) => {
                let tv = self.formula(v, env, None)?;
                let n = self.names.fresh(x);
                let mut env = env.clone();
                env.insert(x.clone(), Term::Var(n.clone(), tv.ty()));
                let tb = self.formula(body, &env, expected)?;
                Term::Let(n, Box::new(tv), Box::new(tb))
            }
            Formula::Match(s, arms) => {
                let ts = self.formula(s, env, None)?;
                let mut out = Vec::new();
                for (p, body) in arms {
                    let mut conds = Vec::new();
                    let mut binds = Vec::new();
                    self.pattern(p, &ts, &mut conds, &mut binds)?;
                    let mut env = env.clone();
                    env.extend(binds);
                    out.push((conds, self.formula(body, &env, expected)?));
                }
                self.match_chain(out)
            }
            Formula::PostMeta { .. } => return Err(VcError::Unsupported("`post` on a source arrow type".into())),
            Formula::Labeled(_, f) => self.formula(f, env, expected)?,
        })
    }
}
