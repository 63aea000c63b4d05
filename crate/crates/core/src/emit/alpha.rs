//! Equality of WhyML modules up to a consistent renaming of identifiers.
//!
//! Top-level names (types, constructors, logic symbols, functions, lemmas)
//! must correspond through one global bijection; bound variables are
//! matched by binding position. Standard-library names, `result` and
//! `use` declarations are left out of the renaming.

use std::collections::HashMap;

use crate::ast::Ty;

use super::whyml::{Decl, FunDef, LogicDef, Module, Pat, Term, TypeBody, TypeDef};
use super::STDLIB;

#[derive(Default)]
struct Alpha {
    fwd: HashMap<String, String>,
    bwd: HashMap<String, String>,
    scope: Vec<(String, String)>,
}

type Res = Result<(), String>;

fn fixed(name: &str) -> bool {
    name == "result"
        || name == "div"
        || ["Nil", "Cons", "Empty", "Node"].contains(&name)
        || STDLIB.iter().any(|(_, _, n)| *n == name)
}

fn check(cond: bool, what: impl FnOnce() -> String) -> Res {
    if cond {
        Ok(())
    } else {
        Err(what())
    }
}

impl Alpha {
    fn global(&mut self, a: &str, b: &str) -> Res {
        if fixed(a) || fixed(b) {
            return check(a == b, || format!("`{a}` and `{b}` differ"));
        }
        match (self.fwd.get(a), self.bwd.get(b)) {
            (None, None) => {
                self.fwd.insert(a.into(), b.into());
                self.bwd.insert(b.into(), a.into());
                Ok(())
            }
            (Some(x), Some(y)) if x == b && y == a => Ok(()),
            (x, y) => Err(format!("`{a}` cannot be renamed to `{b}` (already paired with {x:?} / {y:?})")),
        }
    }

    fn name(&mut self, a: &str, b: &str) -> Res {
        let la = self.scope.iter().rposition(|(x, _)| x == a);
        let lb = self.scope.iter().rposition(|(_, y)| y == b);
        match (la, lb) {
            (Some(i), Some(j)) => check(i == j, || format!("bound `{a}` and `{b}` refer to different binders")),
            (None, None) => self.global(a, b),
            _ => Err(format!("`{a}` and `{b}`: one is bound, the other is not")),
        }
    }

    fn bind(&mut self, a: &str, b: &str) {
        self.scope.push((a.into(), b.into()));
    }

    fn ty(&mut self, a: &Ty, b: &Ty) -> Res {
        match (a, b) {
            (Ty::Named(n, xs), Ty::Named(m, ys)) if xs.len() == ys.len() => {
                self.global(n, m)?;
                xs.iter().zip(ys).try_for_each(|(x, y)| self.ty(x, y))
            }
            (Ty::Tuple(xs), Ty::Tuple(ys)) if xs.len() == ys.len() => {
                xs.iter().zip(ys).try_for_each(|(x, y)| self.ty(x, y))
            }
            (Ty::Arrow(a1, r1), Ty::Arrow(a2, r2)) => {
                self.ty(a1, a2)?;
                self.ty(r1, r2)
            }
            _ => check(a == b, || format!("types `{a}` and `{b}` differ")),
        }
    }

    fn pat(&mut self, a: &Pat, b: &Pat) -> Res {
        match (a, b) {
            (Pat::Wildcard, Pat::Wildcard) => Ok(()),
            (Pat::Var(x), Pat::Var(y)) => {
                self.bind(x, y);
                Ok(())
            }
            (Pat::Int(n), Pat::Int(m)) => check(n == m, || format!("patterns {n} and {m} differ")),
            (Pat::Ctor(c, xs), Pat::Ctor(d, ys)) if xs.len() == ys.len() => {
                self.global(c, d)?;
                xs.iter().zip(ys).try_for_each(|(x, y)| self.pat(x, y))
            }
            (Pat::Tuple(xs), Pat::Tuple(ys)) if xs.len() == ys.len() => {
                xs.iter().zip(ys).try_for_each(|(x, y)| self.pat(x, y))
            }
            _ => Err(format!("patterns {a:?} and {b:?} differ")),
        }
    }

    fn scoped<T>(&mut self, f: impl FnOnce(&mut Self) -> Result<T, String>) -> Result<T, String> {
        let n = self.scope.len();
        let r = f(self);
        self.scope.truncate(n);
        r
    }

    fn terms(&mut self, xs: &[Term], ys: &[Term]) -> Res {
        check(xs.len() == ys.len(), || format!("{} vs {} arguments", xs.len(), ys.len()))?;
        xs.iter().zip(ys).try_for_each(|(x, y)| self.term(x, y))
    }

    fn term(&mut self, a: &Term, b: &Term) -> Res {
        match (a, b) {
            (Term::Var(x), Term::Var(y)) => self.name(x, y),
            (Term::App(f, xs), Term::App(g, ys)) => {
                self.name(f, g)?;
                self.terms(xs, ys)
            }
            (Term::Tuple(xs), Term::Tuple(ys)) => self.terms(xs, ys),
            (Term::Bin(o, x1, y1), Term::Bin(p, x2, y2)) if o == p => {
                self.term(x1, x2)?;
                self.term(y1, y2)
            }
            (Term::Not(x), Term::Not(y)) | (Term::Neg(x), Term::Neg(y)) => self.term(x, y),
            (Term::Implies(x1, y1), Term::Implies(x2, y2)) | (Term::Seq(x1, y1), Term::Seq(x2, y2)) => {
                self.term(x1, x2)?;
                self.term(y1, y2)
            }
            (Term::If(c1, x1, y1), Term::If(c2, x2, y2)) => {
                self.term(c1, c2)?;
                self.term(x1, x2)?;
                self.term(y1, y2)
            }
            (Term::Forall(bs, x), Term::Forall(cs, y)) if bs.len() == cs.len() => self.scoped(|s| {
                for ((n, t), (m, u)) in bs.iter().zip(cs) {
                    s.ty(t, u)?;
                    s.bind(n, m);
                }
                s.term(x, y)
            }),
            (Term::Let(x, v, b1), Term::Let(y, w, b2)) => {
                self.term(v, w)?;
                self.scoped(|s| {
                    s.bind(x, y);
                    s.term(b1, b2)
                })
            }
            (Term::Match(s1, arms1), Term::Match(s2, arms2)) => {
                self.term(s1, s2)?;
                check(arms1.len() == arms2.len(), || "different number of match arms".into())?;
                for ((p, x), (q, y)) in arms1.iter().zip(arms2) {
                    self.scoped(|s| {
                        s.pat(p, q)?;
                        s.term(x, y)
                    })?;
                }
                Ok(())
            }
            _ => check(a == b, || format!("terms `{}` and `{}` differ", super::whyml::inline(a), super::whyml::inline(b))),
        }
    }

    fn params(&mut self, xs: &[(String, Ty)], ys: &[(String, Ty)]) -> Res {
        check(xs.len() == ys.len(), || "different number of parameters".into())?;
        for ((x, t), (y, u)) in xs.iter().zip(ys) {
            self.ty(t, u)?;
            self.bind(x, y);
        }
        Ok(())
    }

    fn typedef(&mut self, a: &TypeDef, b: &TypeDef) -> Res {
        self.global(&a.name, &b.name)?;
        check(a.params == b.params, || format!("type parameters of `{}` differ", a.name))?;
        match (&a.body, &b.body) {
            (TypeBody::Variants(vs), TypeBody::Variants(ws)) if vs.len() == ws.len() => {
                for ((c, fs), (d, gs)) in vs.iter().zip(ws) {
                    self.global(c, d)?;
                    check(fs.len() == gs.len(), || format!("fields of `{c}` differ"))?;
                    fs.iter().zip(gs).try_for_each(|(f, g)| self.ty(f, g))?;
                }
                Ok(())
            }
            (TypeBody::Record(fs), TypeBody::Record(gs)) if fs.len() == gs.len() => {
                for ((f, t), (g, u)) in fs.iter().zip(gs) {
                    self.global(f, g)?;
                    self.ty(t, u)?;
                }
                Ok(())
            }
            _ => Err(format!("bodies of types `{}` and `{}` differ", a.name, b.name)),
        }
    }

    fn logic(&mut self, a: &LogicDef, b: &LogicDef) -> Res {
        self.global(&a.name, &b.name)?;
        self.scoped(|s| {
            s.params(&a.params, &b.params)?;
            match (&a.ret, &b.ret) {
                (Some(t), Some(u)) => s.ty(t, u)?,
                (None, None) => {}
                _ => return Err(format!("`{}` and `{}`: predicate versus function", a.name, b.name)),
            }
            match (&a.body, &b.body) {
                (Some(x), Some(y)) => s.term(x, y),
                (None, None) => Ok(()),
                _ => Err(format!("`{}` and `{}`: only one has a body", a.name, b.name)),
            }
        })
    }

    fn fun(&mut self, a: &FunDef, b: &FunDef) -> Res {
        self.global(&a.name, &b.name)?;
        check(a.function == b.function, || format!("`{}`: `function` qualifier differs", a.name))?;
        self.scoped(|s| {
            s.params(&a.params, &b.params)?;
            s.ty(&a.ret, &b.ret)?;
            s.terms(&a.requires, &b.requires).map_err(|e| format!("requires of `{}`: {e}", a.name))?;
            s.terms(&a.ensures, &b.ensures).map_err(|e| format!("ensures of `{}`: {e}", a.name))?;
            s.term(&a.body, &b.body).map_err(|e| format!("body of `{}`: {e}", a.name))
        })
    }

    fn decl(&mut self, a: &Decl, b: &Decl) -> Res {
        match (a, b) {
            (Decl::Types(xs), Decl::Types(ys)) if xs.len() == ys.len() => {
                xs.iter().zip(ys).try_for_each(|(x, y)| self.typedef(x, y))
            }
            (Decl::Logic(xs), Decl::Logic(ys)) if xs.len() == ys.len() => {
                xs.iter().zip(ys).try_for_each(|(x, y)| self.logic(x, y))
            }
            (Decl::Lemma(n, x), Decl::Lemma(m, y)) => {
                self.global(n, m)?;
                self.term(x, y)
            }
            (Decl::Funs { rec: r1, funs: xs }, Decl::Funs { rec: r2, funs: ys }) if xs.len() == ys.len() => {
                check(r1 == r2, || "`rec` differs".into())?;
                xs.iter().zip(ys).try_for_each(|(x, y)| self.fun(x, y))
            }
            _ => Err("declarations of different kinds".into()),
        }
    }
}

/// `Ok` when `a` and `b` differ only by renaming; otherwise the first
/// difference found.
pub fn alpha_equivalent(a: &Module, b: &Module) -> Result<(), String> {
    let strip = |m: &Module| -> Vec<Decl> {
        m.decls.iter().filter(|d| !matches!(d, Decl::Use(_))).cloned().collect()
    };
    let (xs, ys) = (strip(a), strip(b));
    check(xs.len() == ys.len(), || format!("{} versus {} declarations", xs.len(), ys.len()))?;
    let mut st = Alpha::default();
    for (i, (x, y)) in xs.iter().zip(&ys).enumerate() {
        st.decl(x, y).map_err(|e| format!("declaration {}: {e}", i + 1))?;
    }
    Ok(())
}
