//! The first-order target program produced by defunctionalization.

use crate::ast::{BinOp, Formula, LemmaDecl, LogicDecl, Loc, Pattern, Ty, UnOp};
use crate::typing::{walk_ty, DataType, Signature};

#[derive(Clone, Debug, PartialEq)]
pub enum Callee {
    /// A definition of the program, called directly.
    Fun(String),
    /// The apply function of family `i`.
    Apply(usize),
    /// `max`, `min` or `abs`.
    Builtin(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct FoExpr {
    pub kind: FoKind,
    /// First-order type; never contains an arrow.
    pub ty: Ty,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FoKind {
    Unit,
    Var(String),
    Int(i64),
    Bool(bool),
    /// Constructor application, including `Nil`, `Cons` and continuation
    /// constructors.
    Ctor(String, Vec<FoExpr>),
    Tuple(Vec<FoExpr>),
    BinOp(BinOp, Box<FoExpr>, Box<FoExpr>),
    UnOp(UnOp, Box<FoExpr>),
    Seq(Box<FoExpr>, Box<FoExpr>),
    Let(String, Box<FoExpr>, Box<FoExpr>),
    Match(Box<FoExpr>, Vec<(Pattern, FoExpr)>),
    If(Box<FoExpr>, Box<FoExpr>, Box<FoExpr>),
    Call(Callee, Vec<FoExpr>),
    /// Unreachable branch added to non-exhaustive matches.
    Absurd,
}

impl FoExpr {
    pub fn new(kind: FoKind, ty: Ty) -> Self {
        FoExpr { kind, ty }
    }

    pub fn var(name: &str, ty: Ty) -> Self {
        FoExpr::new(FoKind::Var(name.into()), ty)
    }

    /// Children in evaluation order.
    pub fn children(&self) -> Vec<&FoExpr> {
        match &self.kind {
            FoKind::Ctor(_, xs) | FoKind::Tuple(xs) | FoKind::Call(_, xs) => xs.iter().collect(),
            FoKind::BinOp(_, a, b) | FoKind::Seq(a, b) | FoKind::Let(_, a, b) => vec![a, b],
            FoKind::UnOp(_, a) => vec![a],
            FoKind::Match(s, arms) => std::iter::once(&**s).chain(arms.iter().map(|(_, e)| e)).collect(),
            FoKind::If(c, a, b) => vec![c, a, b],
            _ => vec![],
        }
    }

    /// Pre-order walk.
    pub fn walk(&self, f: &mut dyn FnMut(&FoExpr)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }

    /// The value as a logical term, when it is built only from variables,
    /// literals and constructors.
    pub fn as_term(&self) -> Option<Formula> {
        Some(match &self.kind {
            FoKind::Unit => Formula::Unit,
            FoKind::Var(x) => Formula::Var(x.clone()),
            FoKind::Int(n) => Formula::Int(*n),
            FoKind::Bool(true) => Formula::True,
            FoKind::Bool(false) => Formula::False,
            FoKind::Ctor(c, xs) => Formula::Ctor(c.clone(), xs.iter().map(|x| x.as_term()).collect::<Option<_>>()?),
            FoKind::Tuple(xs) => Formula::Tuple(xs.iter().map(|x| x.as_term()).collect::<Option<_>>()?),
            _ => return None,
        })
    }
}

/// A lambda occurrence (or a level of a global function used as a value),
/// replaced by a constructor of its family.
#[derive(Clone, Debug, PartialEq)]
pub struct LambdaSite {
    pub id: usize,
    pub family: usize,
    pub ctor: String,
    /// Source arrow type.
    pub arrow_ty: Ty,
    /// Parameter name and lowered type.
    pub param: (String, Ty),
    /// Captured variables with lowered types, in constructor-field order.
    pub captured: Vec<(String, Ty)>,
    /// Rewritten body, evaluated with `captured` and `param` bound.
    pub body: FoExpr,
    /// The post arm: conjunction of translated ensures over `captured`,
    /// `param` and `result`.
    pub post: Formula,
    pub origin: Loc,
    /// Set when the site stands for a partially applied global function.
    pub eta_of: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KontFamily {
    pub index: usize,
    pub arrow_ty: Ty,
    pub kont: String,
    pub apply: String,
    pub post: String,
    /// Lowered domain and codomain.
    pub dom: Ty,
    pub cod: Ty,
    /// Site ids, in constructor order.
    pub sites: Vec<usize>,
    /// Names used for the argument and result parameters of apply and
    /// post (`arg`/`result` unless captured names collide).
    pub arg_name: String,
    pub result_name: String,
}

impl KontFamily {
    pub fn kont_ty(&self) -> Ty {
        Ty::named(&self.kont)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PostDef {
    pub family: usize,
    pub name: String,
    /// `(k, arg, result)` parameter names and types.
    pub params: Vec<(String, Ty)>,
    pub body: Formula,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FunKind {
    Apply(usize),
    Def { is_rec: bool },
    /// A top-level value or expression, emitted as a function of unit.
    Value,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FoFun {
    pub name: String,
    pub params: Vec<(String, Ty)>,
    pub ret: Ty,
    pub requires: Vec<Formula>,
    pub ensures: Vec<Formula>,
    pub body: FoExpr,
    pub kind: FunKind,
    /// Definition carrying a precondition, translated without a
    /// continuation constructor.
    pub bypassed: bool,
    pub loc: Loc,
}

#[derive(Clone, Debug)]
pub struct TargetProgram {
    /// Source data types (lowered), then continuation types.
    pub types: Vec<DataType>,
    pub logic: Vec<LogicDecl>,
    pub families: Vec<KontFamily>,
    pub sites: Vec<LambdaSite>,
    pub posts: Vec<PostDef>,
    pub lemmas: Vec<LemmaDecl>,
    pub functions: Vec<FoFun>,
    /// Function names grouped into mutually recursive blocks, callees
    /// before callers.
    pub groups: Vec<Vec<String>>,
    /// Lowered signature including continuation types and post predicates.
    pub sig: Signature,
}

impl TargetProgram {
    pub fn function(&self, name: &str) -> Option<&FoFun> {
        self.functions.iter().find(|f| f.name == name)
    }

    pub fn site(&self, id: usize) -> &LambdaSite {
        self.sites.iter().find(|s| s.id == id).expect("site id")
    }

    pub fn callee_name(&self, c: &Callee) -> String {
        match c {
            Callee::Fun(n) | Callee::Builtin(n) => n.clone(),
            Callee::Apply(i) => self.families[*i].apply.clone(),
        }
    }

    pub fn family_by_kont(&self, kont: &str) -> Option<&KontFamily> {
        self.families.iter().find(|f| f.kont == kont)
    }

    /// Every type occurring in a binder, field, parameter or expression.
    pub fn all_types(&self) -> Vec<Ty> {
        let mut out = Vec::new();
        for d in &self.types {
            for v in &d.variants {
                out.extend(v.fields.iter().cloned());
            }
        }
        for l in &self.logic {
            out.extend(l.params.iter().map(|(_, t)| t.clone()));
            out.push(l.ret.clone());
        }
        for p in &self.posts {
            out.extend(p.params.iter().map(|(_, t)| t.clone()));
            formula_types(&p.body, &mut out);
        }
        for l in &self.lemmas {
            formula_types(&l.formula, &mut out);
        }
        for f in &self.functions {
            out.extend(f.params.iter().map(|(_, t)| t.clone()));
            out.push(f.ret.clone());
            for g in f.requires.iter().chain(&f.ensures) {
                formula_types(g, &mut out);
            }
            f.body.walk(&mut |e| {
                out.push(e.ty.clone());
                if let FoKind::Match(_, arms) = &e.kind {
                    for (p, _) in arms {
                        pattern_types(p, &mut out);
                    }
                }
            });
        }
        out
    }

    /// First-order purity: no arrow type anywhere.
    pub fn check_first_order(&self) -> Result<(), String> {
        for t in self.all_types() {
            let mut bad = false;
            walk_ty(&t, &mut |x| bad |= x.is_arrow());
            if bad {
                return Err(format!("arrow type {t} in the target program"));
            }
        }
        Ok(())
    }

    /// Every apply matches exactly the constructors of its family, and every
    /// `applyN x a` call has `x : kontN`.
    pub fn check_families(&self) -> Result<(), String> {
        for fam in &self.families {
            let f = self.function(&fam.apply).ok_or_else(|| format!("missing {}", fam.apply))?;
            let FoKind::Match(_, arms) = &f.body.kind else {
                return Err(format!("{} does not match on its continuation", fam.apply));
            };
            let ctors: Vec<String> = arms
                .iter()
                .map(|(p, _)| match p {
                    Pattern::Ctor(c, _) => c.clone(),
                    other => format!("{other:?}"),
                })
                .collect();
            let want: Vec<String> = fam.sites.iter().map(|id| self.site(*id).ctor.clone()).collect();
            if ctors != want {
                return Err(format!("{} covers {ctors:?}, family has {want:?}", fam.apply));
            }
        }
        for f in &self.functions {
            let mut res = Ok(());
            f.body.walk(&mut |e| {
                if let FoKind::Call(Callee::Apply(i), args) = &e.kind {
                    let fam = &self.families[*i];
                    if args.len() != 2 || args[0].ty != fam.kont_ty() || args[1].ty != fam.dom {
                        res = Err(format!("ill-typed call to {} in {}", fam.apply, f.name));
                    }
                }
            });
            res?;
        }
        Ok(())
    }

    /// Every continuation constructor application passes the captured
    /// variables of its site, name for name.
    pub fn check_captures(&self) -> Result<(), String> {
        let mut res = Ok(());
        let mut check = |e: &FoExpr| {
            if let FoKind::Ctor(c, args) = &e.kind {
                if let Some(site) = self.sites.iter().find(|s| &s.ctor == c) {
                    let names: Vec<Option<&str>> = args
                        .iter()
                        .map(|a| match &a.kind {
                            FoKind::Var(x) => Some(x.as_str()),
                            _ => None,
                        })
                        .collect();
                    let want: Vec<Option<&str>> = site.captured.iter().map(|(n, _)| Some(n.as_str())).collect();
                    // eta constructors of partial applications carry the
                    // supplied arguments instead
                    if site.eta_of.is_none() && names != want {
                        res = Err(format!("{c} built with {names:?}, captures {want:?}"));
                    }
                }
            }
        };
        for f in &self.functions {
            f.body.walk(&mut check);
        }
        res
    }
}

pub fn pattern_types(p: &Pattern, out: &mut Vec<Ty>) {
    match p {
        Pattern::Var(_, Some(t)) => out.push(t.clone()),
        Pattern::Cons(h, t) => {
            pattern_types(h, out);
            pattern_types(t, out);
        }
        Pattern::Ctor(_, ps) | Pattern::Tuple(ps) => ps.iter().for_each(|q| pattern_types(q, out)),
        _ => {}
    }
}

pub fn formula_types(f: &Formula, out: &mut Vec<Ty>) {
    match f {
        Formula::Forall(bs, b) => {
            out.extend(bs.iter().filter_map(|b| b.ty.clone()));
            formula_types(b, out);
        }
        Formula::Match(s, arms) => {
            formula_types(s, out);
            for (p, b) in arms {
                pattern_types(p, out);
                formula_types(b, out);
            }
        }
        Formula::Ctor(_, xs) | Formula::Tuple(xs) | Formula::App(_, xs) => {
            xs.iter().for_each(|x| formula_types(x, out))
        }
        Formula::Bin(_, a, b) | Formula::Implies(a, b) | Formula::Let(_, a, b) => {
            formula_types(a, out);
            formula_types(b, out);
        }
        Formula::Un(_, a) | Formula::Labeled(_, a) => formula_types(a, out),
        Formula::PostMeta { fn_ty, .. } => out.push(fn_ty.clone()),
        _ => {}
    }
}
