//! Defunctionalization: every lambda becomes a constructor of the
//! continuation type of its arrow type, every application of an
//! arrow-typed value becomes a call to that type's apply function, and
//! lambda specifications become arms of the type's post predicate.

pub mod target;

use std::collections::{HashMap, HashSet};

use indexmap::IndexMap;
use petgraph::graph::{DiGraph, NodeIndex};

use crate::ast::*;
use crate::spec::{self, expand_post_meta, lower_pattern, Families};
use crate::typing::exhaustive::is_exhaustive;
use crate::typing::{DataType, LogicSig, Signature, TypedProgram, CODE_BUILTINS};

pub use target::*;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DefuncError {
    #[error("{loc}: no functions of type {ty} are defined")]
    NoFamily { ty: Ty, loc: Loc },
    #[error("{loc}: `{name}` has a precondition and cannot be used as a first-class value")]
    ExemptAsValue { name: String, loc: Loc },
    #[error("{loc}: unsupported: {what}")]
    Unsupported { what: String, loc: Loc },
    #[error("{loc}: {source}")]
    Header { source: spec::HeaderArityError, loc: Loc },
}

type DResult<T> = Result<T, DefuncError>;

pub fn defunctionalize(tp: &TypedProgram) -> DResult<TargetProgram> {
    let mut d = Defunc::new(tp);
    d.run()
}

struct Global {
    params: Vec<(String, Ty)>,
    ret: Ty,
    bypass: bool,
    spec: Option<Spec>,
}

struct Fam {
    kont: String,
    apply: String,
    post: String,
    sites: Vec<usize>,
    loc: Loc,
}

struct Defunc<'a> {
    tp: &'a TypedProgram,
    fams: IndexMap<Ty, Fam>,
    sites: Vec<LambdaSite>,
    next_site: usize,
    globals: HashMap<String, Global>,
    eta: HashMap<(String, usize), String>,
    taken: HashSet<String>,
    /// Local variables in scope with their source types, innermost last.
    locals: Vec<(String, Ty)>,
    /// Captured-name lists of the enclosing lambda sites.
    captures: Vec<Vec<String>>,
    loc: Loc,
}

impl Families for Defunc<'_> {
    fn family_of(&mut self, arrow: &Ty) -> usize {
        if let Some(i) = self.fams.get_index_of(arrow) {
            return i;
        }
        let i = self.fams.len();
        let fam = Fam {
            kont: self.gen(&format!("kont{i}")),
            apply: self.gen(&format!("apply{i}")),
            post: self.gen(&format!("post{i}")),
            sites: Vec::new(),
            loc: self.loc,
        };
        self.fams.insert(arrow.clone(), fam);
        if let Ty::Arrow(dom, cod) = arrow {
            self.lower(dom);
            self.lower(cod);
        }
        i
    }

    fn post_name(&self, family: usize) -> String {
        self.fams[family].post.clone()
    }

    fn lower(&mut self, ty: &Ty) -> Ty {
        match ty {
            Ty::Arrow(..) => {
                let i = self.family_of(ty);
                Ty::named(&self.fams[i].kont)
            }
            Ty::Tuple(ts) => Ty::Tuple(ts.iter().map(|t| self.lower(t)).collect()),
            Ty::Named(n, ts) => Ty::Named(n.clone(), ts.iter().map(|t| self.lower(t)).collect()),
            t => t.clone(),
        }
    }
}

fn src_ty(e: &Expr) -> Ty {
    e.ty.clone().expect("type-checked expression")
}

/// Nested unary lambdas equivalent to a local function definition; the
/// spec, header removed, goes on the innermost one.
fn def_to_lambda(d: &LetDef) -> DResult<Expr> {
    let params: Vec<(String, Ty)> =
        d.params.iter().map(|p| (p.name.clone(), p.ty.clone().expect("typed"))).collect();
    let ret = d.ret.clone().unwrap_or_else(|| src_ty(&d.body));
    let names: Vec<String> = params.iter().map(|(n, _)| n.clone()).collect();
    let spec = match &d.spec {
        Some(s) => Some(
            spec::normalize_header(s, &names, &ret).map_err(|source| DefuncError::Header { source, loc: d.loc })?,
        ),
        None => None,
    };
    let mut body = d.body.clone();
    let mut ret_ty = ret;
    for (i, (n, t)) in params.iter().enumerate().rev() {
        let ty = Ty::arrow(t.clone(), ret_ty.clone());
        let lam = Lambda {
            spec: if i + 1 == params.len() { spec.clone() } else { None },
            params: vec![Param::new(n, t.clone())],
            ret: Some(ret_ty.clone()),
            body: Box::new(body),
        };
        body = Expr::typed(ExprKind::Lambda(lam), d.loc, ty.clone());
        ret_ty = ty;
    }
    Ok(body)
}

/// Variables bound by a typed pattern, with their types.
fn pattern_bindings(p: &Pattern, out: &mut Vec<(String, Ty)>) {
    match p {
        Pattern::Var(n, t) => out.push((n.clone(), t.clone().expect("typed pattern"))),
        Pattern::Cons(h, t) => {
            pattern_bindings(h, out);
            pattern_bindings(t, out);
        }
        Pattern::Ctor(_, ps) | Pattern::Tuple(ps) => ps.iter().for_each(|q| pattern_bindings(q, out)),
        _ => {}
    }
}

/// List sugar in patterns becomes the `Nil`/`Cons` constructors.
fn desugar_pattern(p: &Pattern) -> Pattern {
    match p {
        Pattern::Nil => Pattern::Ctor("Nil".into(), vec![]),
        Pattern::Cons(h, t) => Pattern::Ctor("Cons".into(), vec![desugar_pattern(h), desugar_pattern(t)]),
        Pattern::Ctor(c, ps) => Pattern::Ctor(c.clone(), ps.iter().map(desugar_pattern).collect()),
        Pattern::Tuple(ps) => Pattern::Tuple(ps.iter().map(desugar_pattern).collect()),
        p => p.clone(),
    }
}

impl<'a> Defunc<'a> {
    fn new(tp: &'a TypedProgram) -> Self {
        Defunc {
            tp,
            fams: IndexMap::new(),
            sites: Vec::new(),
            next_site: 0,
            globals: HashMap::new(),
            eta: HashMap::new(),
            taken: program_names(tp),
            locals: Vec::new(),
            captures: Vec::new(),
            loc: Loc::default(),
        }
    }

    /// A generated name, suffixed with `_g` until it is unused.
    fn gen(&mut self, base: &str) -> String {
        let mut name = base.to_string();
        while self.taken.contains(&name) {
            name.push_str("_g");
        }
        self.taken.insert(name.clone());
        name
    }

    fn unsupported<T>(&self, what: impl Into<String>) -> DResult<T> {
        Err(DefuncError::Unsupported { what: what.into(), loc: self.loc })
    }

    fn local_ty(&self, x: &str) -> Option<&Ty> {
        self.locals.iter().rev().find(|(n, _)| n == x).map(|(_, t)| t)
    }

    fn run(&mut self) -> DResult<TargetProgram> {
        let program = &self.tp.program;
        for d in program.defs() {
            self.loc = d.loc;
            if self.globals.contains_key(&d.name) {
                return self.unsupported(format!("redefinition of `{}`", d.name));
            }
            let params = d.params.iter().map(|p| (p.name.clone(), p.ty.clone().expect("typed"))).collect();
            let ret = d.ret.clone().unwrap_or_else(|| src_ty(&d.body));
            self.globals.insert(
                d.name.clone(),
                Global { params, ret, bypass: !d.requires().is_empty(), spec: d.spec.clone() },
            );
        }

        let mut logic = Vec::new();
        for l in &program.prelude {
            self.loc = l.loc;
            let params = l.params.iter().map(|(n, t)| (n.clone(), self.lower(t))).collect();
            let ret = self.lower(&l.ret);
            let body = l.body.as_ref().map(|b| expand_post_meta(b, self));
            logic.push(LogicDecl { params, ret, body, ..l.clone() });
        }

        let mut lemmas = Vec::new();
        let mut functions = Vec::new();
        for item in &program.items {
            match item {
                TopLevel::TypeDecl(_) => {}
                TopLevel::Lemma(l) => {
                    self.loc = l.loc;
                    let formula = expand_post_meta(&l.formula, self);
                    lemmas.push(LemmaDecl { formula, ..l.clone() });
                }
                TopLevel::LetDef(d) => functions.push(self.top_def(d)?),
                TopLevel::Expr(e) => {
                    self.loc = e.loc;
                    let body = self.expr(e)?;
                    let name = self.gen("main");
                    functions.push(FoFun {
                        name,
                        params: vec![],
                        ret: body.ty.clone(),
                        requires: vec![],
                        ensures: vec![],
                        body,
                        kind: FunKind::Value,
                        bypassed: false,
                        loc: e.loc,
                    });
                }
            }
        }
        self.finish(logic, lemmas, functions)
    }

    fn top_def(&mut self, d: &LetDef) -> DResult<FoFun> {
        self.loc = d.loc;
        let g = &self.globals[&d.name];
        let src_params = g.params.clone();
        let src_ret = g.ret.clone();
        let bypassed = g.bypass;
        self.locals = src_params.clone();
        let body = self.expr(&d.body)?;
        self.locals.clear();
        self.loc = d.loc;
        let params: Vec<(String, Ty)> = src_params.iter().map(|(n, t)| (n.clone(), self.lower(t))).collect();
        let ret = self.lower(&src_ret);
        let names: Vec<String> = params.iter().map(|(n, _)| n.clone()).collect();
        let (requires, ensures) = match &d.spec {
            Some(s) => spec::translate_spec(s, &names, &src_ret, self)
                .map_err(|source| DefuncError::Header { source, loc: d.loc })?,
            None => (vec![], vec![]),
        };
        let kind = if d.params.is_empty() { FunKind::Value } else { FunKind::Def { is_rec: d.is_rec } };
        Ok(FoFun { name: d.name.clone(), params, ret, requires, ensures, body, kind, bypassed, loc: d.loc })
    }

    fn expr(&mut self, e: &Expr) -> DResult<FoExpr> {
        stacker::maybe_grow(64 * 1024, 2 * 1024 * 1024, || self.expr_inner(e))
    }

    fn expr_inner(&mut self, e: &Expr) -> DResult<FoExpr> {
        self.loc = e.loc;
        let sty = src_ty(e);
        let ty = self.lower(&sty);
        let kind = match &e.kind {
            ExprKind::Unit => FoKind::Unit,
            ExprKind::Int(n) => FoKind::Int(*n),
            ExprKind::Bool(b) => FoKind::Bool(*b),
            ExprKind::Var(x) => return self.var(x, &sty),
            ExprKind::Ctor(c, args) => FoKind::Ctor(c.clone(), self.exprs(args)?),
            ExprKind::Nil => FoKind::Ctor("Nil".into(), vec![]),
            ExprKind::Cons(h, t) => FoKind::Ctor("Cons".into(), vec![self.expr(h)?, self.expr(t)?]),
            ExprKind::Tuple(xs) => FoKind::Tuple(self.exprs(xs)?),
            ExprKind::BinOp(op, a, b) => FoKind::BinOp(*op, Box::new(self.expr(a)?), Box::new(self.expr(b)?)),
            ExprKind::UnOp(op, a) => FoKind::UnOp(*op, Box::new(self.expr(a)?)),
            ExprKind::Seq(a, b) => FoKind::Seq(Box::new(self.expr(a)?), Box::new(self.expr(b)?)),
            ExprKind::If(c, a, b) => {
                FoKind::If(Box::new(self.expr(c)?), Box::new(self.expr(a)?), Box::new(self.expr(b)?))
            }
            ExprKind::LetIn(d, body) => {
                let (v, dty) = if d.is_function() {
                    if d.is_rec {
                        return self.unsupported(format!("local recursive function `{}`", d.name));
                    }
                    if !d.requires().is_empty() {
                        return self.unsupported(format!("precondition on local function `{}`", d.name));
                    }
                    let lam = def_to_lambda(d)?;
                    let t = src_ty(&lam);
                    (self.expr(&lam)?, t)
                } else {
                    if d.spec.is_some() {
                        return self.unsupported(format!("specification on local value `{}`", d.name));
                    }
                    (self.expr(&d.body)?, src_ty(&d.body))
                };
                self.locals.push((d.name.clone(), dty));
                let b = self.expr(body)?;
                self.locals.pop();
                FoKind::Let(d.name.clone(), Box::new(v), Box::new(b))
            }
            ExprKind::Match(s, arms) => {
                let scrut = self.expr(s)?;
                let mut out = Vec::new();
                for (p, body) in arms {
                    let mut binds = Vec::new();
                    pattern_bindings(p, &mut binds);
                    let n = self.locals.len();
                    self.locals.extend(binds);
                    let b = self.expr(body)?;
                    self.locals.truncate(n);
                    out.push((lower_pattern(&desugar_pattern(p), self), b));
                }
                let pats: Vec<&Pattern> = arms.iter().map(|(p, _)| p).collect();
                if !is_exhaustive(&self.tp.sig, &src_ty(s), &pats) {
                    out.push((Pattern::Wildcard, FoExpr::new(FoKind::Absurd, ty.clone())));
                }
                FoKind::Match(Box::new(scrut), out)
            }
            ExprKind::Lambda(l) => return self.lambda(l, &sty),
            ExprKind::App(..) => return self.app(e),
        };
        Ok(FoExpr::new(kind, ty))
    }

    fn exprs(&mut self, xs: &[Expr]) -> DResult<Vec<FoExpr>> {
        xs.iter().map(|x| self.expr(x)).collect()
    }

    fn var(&mut self, x: &str, sty: &Ty) -> DResult<FoExpr> {
        let ty = self.lower(sty);
        if self.local_ty(x).is_some() {
            return Ok(FoExpr::var(x, ty));
        }
        match self.globals.get(x) {
            Some(g) if g.params.is_empty() => Ok(FoExpr::new(FoKind::Call(Callee::Fun(x.into()), vec![]), ty)),
            Some(g) if g.bypass => Err(DefuncError::ExemptAsValue { name: x.into(), loc: self.loc }),
            Some(_) => self.eta(x, 0, vec![]),
            None if CODE_BUILTINS.contains(&x) => self.unsupported(format!("built-in `{x}` used as a value")),
            None => self.unsupported(format!("unbound variable `{x}`")),
        }
    }

    fn app(&mut self, e: &Expr) -> DResult<FoExpr> {
        let mut args = Vec::new();
        let mut head = e;
        while let ExprKind::App(f, a) = &head.kind {
            args.push(&**a);
            head = f;
        }
        args.reverse();
        let loc = e.loc;
        if let ExprKind::Var(g) = &head.kind {
            if self.local_ty(g).is_none() {
                if let Some(glob) = self.globals.get(g) {
                    let m = glob.params.len();
                    if m > 0 {
                        let bypass = glob.bypass;
                        let ret = glob.ret.clone();
                        if args.len() < m {
                            if bypass {
                                return Err(DefuncError::ExemptAsValue { name: g.clone(), loc });
                            }
                            let vals = args.iter().map(|a| self.expr(a)).collect::<DResult<Vec<_>>>()?;
                            return self.eta(g, vals.len(), vals);
                        }
                        let vals = args[..m].iter().map(|a| self.expr(a)).collect::<DResult<Vec<_>>>()?;
                        let ty = self.lower(&ret);
                        let call = FoExpr::new(FoKind::Call(Callee::Fun(g.clone()), vals), ty);
                        return self.apply_chain(call, ret, &args[m..]);
                    }
                } else if CODE_BUILTINS.contains(&g.as_str()) {
                    let arity = if g == "abs" { 1 } else { 2 };
                    if args.len() != arity {
                        self.loc = loc;
                        return self.unsupported(format!("partial application of built-in `{g}`"));
                    }
                    let vals = args.iter().map(|a| self.expr(a)).collect::<DResult<Vec<_>>>()?;
                    return Ok(FoExpr::new(FoKind::Call(Callee::Builtin(g.clone()), vals), Ty::Int));
                }
            }
        }
        let h = self.expr(head)?;
        self.apply_chain(h, src_ty(head), &args)
    }

    /// `apply (.. (apply f a1) ..) an`, innermost first.
    fn apply_chain(&mut self, mut cur: FoExpr, mut sty: Ty, args: &[&Expr]) -> DResult<FoExpr> {
        for a in args {
            let fam = self.family_of(&sty);
            let v = self.expr(a)?;
            let Ty::Arrow(_, cod) = sty else { unreachable!("typing checked applications") };
            let ty = self.lower(&cod);
            cur = FoExpr::new(FoKind::Call(Callee::Apply(fam), vec![cur, v]), ty);
            sty = *cod;
        }
        Ok(cur)
    }

    /// Constructor for global `g` partially applied to `args`, creating the
    /// eta sites of levels `args.len()..` on first use.
    fn eta(&mut self, g: &str, level: usize, args: Vec<FoExpr>) -> DResult<FoExpr> {
        let glob = &self.globals[g];
        let arrow = Ty::arrows(glob.params[level..].iter().map(|(_, t)| t.clone()), glob.ret.clone());
        let ty = self.lower(&arrow);
        let ctor = match self.eta.get(&(g.to_string(), level)) {
            Some(c) => c.clone(),
            None => self.eta_site(g, level, arrow)?,
        };
        Ok(FoExpr::new(FoKind::Ctor(ctor, args), ty))
    }

    fn eta_site(&mut self, g: &str, level: usize, arrow: Ty) -> DResult<String> {
        let id = self.next_site;
        self.next_site += 1;
        let family = self.family_of(&arrow);
        let ctor = self.gen(&format!("K{id}"));
        self.eta.insert((g.to_string(), level), ctor.clone());
        let glob = &self.globals[g];
        let params = glob.params.clone();
        let ret = glob.ret.clone();
        let spec = glob.spec.clone();
        let lowered: Vec<(String, Ty)> = params.iter().map(|(n, t)| (n.clone(), self.lower(t))).collect();
        let vars: Vec<FoExpr> = lowered[..=level].iter().map(|(n, t)| FoExpr::var(n, t.clone())).collect();
        let (body, post) = if level + 1 < params.len() {
            let body = self.eta(g, level + 1, vars)?;
            let post = Formula::eq(Formula::var("result"), body.as_term().expect("constructor of variables"));
            (body, post)
        } else {
            let ty = self.lower(&ret);
            let body = FoExpr::new(FoKind::Call(Callee::Fun(g.to_string()), vars), ty);
            let names: Vec<String> = params.iter().map(|(n, _)| n.clone()).collect();
            let ensures = match &spec {
                Some(s) => {
                    spec::translate_spec(s, &names, &ret, self)
                        .map_err(|source| DefuncError::Header { source, loc: self.loc })?
                        .1
                }
                None => vec![],
            };
            (body, Formula::conj(ensures))
        };
        self.fams[family].sites.push(id);
        self.sites.push(LambdaSite {
            id,
            family,
            ctor: ctor.clone(),
            arrow_ty: arrow,
            param: lowered[level].clone(),
            captured: lowered[..level].to_vec(),
            body,
            post,
            origin: self.loc,
            eta_of: Some(g.to_string()),
        });
        Ok(ctor)
    }

    fn lambda(&mut self, l: &Lambda, sty: &Ty) -> DResult<FoExpr> {
        let loc = self.loc;
        if l.spec.as_ref().is_some_and(|s| !s.requires.is_empty()) {
            return Err(DefuncError::ExemptAsValue { name: "anonymous function".into(), loc });
        }
        let [param] = l.params.as_slice() else { unreachable!("lambdas are curried before typing") };
        let pty = param.ty.clone().expect("typed");
        let id = self.next_site;
        self.next_site += 1;
        let family = self.family_of(sty);

        // Free locals of the body, then those only mentioned in its specification.
        let mut free: Vec<String> = free_vars(&l.body).into_iter().map(|(n, _)| n).collect();
        if let Some(s) = &l.spec {
            for f in &s.ensures {
                free.extend(f.free_vars());
            }
        }
        let mut fv: Vec<String> = Vec::new();
        for n in free {
            if n != param.name && n != "result" && !fv.contains(&n) && self.local_ty(&n).is_some() {
                fv.push(n);
            }
        }
        // Names inherited from the enclosing site keep that site's order.
        let mut captured: Vec<String> = match self.captures.last() {
            Some(parent) => parent.iter().filter(|n| fv.contains(n)).cloned().collect(),
            None => vec![],
        };
        for n in fv {
            if !captured.contains(&n) {
                captured.push(n);
            }
        }
        let captured: Vec<(String, Ty)> = captured
            .into_iter()
            .map(|n| {
                let t = self.local_ty(&n).expect("local").clone();
                (n, t)
            })
            .collect();
        let captured: Vec<(String, Ty)> = captured.iter().map(|(n, t)| (n.clone(), self.lower(t))).collect();
        let ctor = self.gen(&format!("K{id}"));

        self.captures.push(captured.iter().map(|(n, _)| n.clone()).collect());
        self.locals.push((param.name.clone(), pty.clone()));
        let body = self.expr(&l.body)?;
        self.locals.pop();
        self.captures.pop();
        self.loc = loc;

        let mut post: Vec<Formula> = match &l.spec {
            Some(s) => s.ensures.iter().map(|f| expand_post_meta(f, self)).collect(),
            None => vec![],
        };
        if matches!(l.body.kind, ExprKind::Lambda(_)) {
            post.push(Formula::eq(Formula::var("result"), body.as_term().expect("constructor of variables")));
        }
        let lowered_param = (param.name.clone(), self.lower(&pty));
        self.fams[family].sites.push(id);
        self.sites.push(LambdaSite {
            id,
            family,
            ctor: ctor.clone(),
            arrow_ty: sty.clone(),
            param: lowered_param,
            captured: captured.clone(),
            body,
            post: Formula::conj(post),
            origin: loc,
            eta_of: None,
        });
        let args = captured.into_iter().map(|(n, t)| FoExpr::var(&n, t)).collect();
        let ty = self.lower(sty);
        Ok(FoExpr::new(FoKind::Ctor(ctor, args), ty))
    }

    fn finish(&mut self, logic: Vec<LogicDecl>, lemmas: Vec<LemmaDecl>, user: Vec<FoFun>) -> DResult<TargetProgram> {
        for (ty, fam) in &self.fams {
            if fam.sites.is_empty() {
                return Err(DefuncError::NoFamily { ty: ty.clone(), loc: fam.loc });
            }
        }
        self.sites.sort_by_key(|s| s.id);
        for fam in self.fams.values_mut() {
            fam.sites.sort_unstable();
        }

        let mut families = Vec::new();
        for (index, (arrow, fam)) in self.fams.iter().enumerate() {
            let Ty::Arrow(dom, cod) = arrow else { unreachable!("families are keyed by arrow types") };
            let mut used: HashSet<&str> = HashSet::new();
            for id in &fam.sites {
                let s = self.sites.iter().find(|s| s.id == *id).expect("site");
                used.insert(&s.param.0);
                used.extend(s.captured.iter().map(|(n, _)| n.as_str()));
            }
            let suffix = |base: &str| {
                let mut n = base.to_string();
                while used.contains(n.as_str()) || n == "k" {
                    n.push_str("_g");
                }
                n
            };
            families.push(KontFamily {
                index,
                arrow_ty: arrow.clone(),
                kont: fam.kont.clone(),
                apply: fam.apply.clone(),
                post: fam.post.clone(),
                dom: Ty::Unit,
                cod: Ty::Unit,
                sites: fam.sites.clone(),
                arg_name: suffix("arg"),
                result_name: suffix("result"),
            });
            let _ = (dom, cod);
        }
        for f in families.iter_mut() {
            let Ty::Arrow(dom, cod) = f.arrow_ty.clone() else { unreachable!() };
            f.dom = self.lower(&dom);
            f.cod = self.lower(&cod);
        }

        let mut types: Vec<DataType> = Vec::new();
        let mut sig = Signature::with_builtins();
        for d in self.tp.sig.datatypes.values().filter(|d| !d.builtin) {
            let variants = d
                .variants
                .iter()
                .map(|v| Variant { name: v.name.clone(), fields: v.fields.iter().map(|t| self.lower(t)).collect() })
                .collect();
            let record =
                d.record.as_ref().map(|fs| fs.iter().map(|(n, t)| (n.clone(), self.lower(t))).collect());
            let nd = DataType { variants, record, ..d.clone() };
            sig.add_datatype(nd.clone());
            types.push(nd);
        }
        for f in &families {
            let variants = f
                .sites
                .iter()
                .map(|id| {
                    let s = self.site_ref(*id);
                    Variant { name: s.ctor.clone(), fields: s.captured.iter().map(|(_, t)| t.clone()).collect() }
                })
                .collect();
            let d = DataType { name: f.kont.clone(), params: vec![], variants, record: None, builtin: false };
            sig.add_datatype(d.clone());
            types.push(d);
        }
        for l in &logic {
            sig.logic.insert(
                l.name.clone(),
                LogicSig {
                    params: l.params.iter().map(|(_, t)| t.clone()).collect(),
                    ret: l.ret.clone(),
                    predicate: l.predicate,
                    builtin: false,
                },
            );
        }

        let mut posts = Vec::new();
        let mut applies = Vec::new();
        for f in &families {
            let kty = f.kont_ty();
            let k = FoExpr::var("k", kty.clone());
            let mut apply_arms = Vec::new();
            let mut post_arms = Vec::new();
            for id in &f.sites {
                let s = self.site_ref(*id);
                let pat = Pattern::Ctor(
                    s.ctor.clone(),
                    s.captured.iter().map(|(n, t)| Pattern::Var(n.clone(), Some(t.clone()))).collect(),
                );
                let arg = FoExpr::var(&f.arg_name, f.dom.clone());
                let body = FoExpr::new(
                    FoKind::Let(s.param.0.clone(), Box::new(arg), Box::new(s.body.clone())),
                    s.body.ty.clone(),
                );
                apply_arms.push((pat.clone(), body));
                let post = if f.result_name == "result" {
                    s.post.clone()
                } else {
                    s.post.subst1("result", &Formula::var(&f.result_name))
                };
                post_arms.push((
                    pat,
                    Formula::Let(s.param.0.clone(), Box::new(Formula::var(&f.arg_name)), Box::new(post)),
                ));
            }
            posts.push(PostDef {
                family: f.index,
                name: f.post.clone(),
                params: vec![
                    ("k".into(), kty.clone()),
                    (f.arg_name.clone(), f.dom.clone()),
                    (f.result_name.clone(), f.cod.clone()),
                ],
                body: Formula::Match(Box::new(Formula::var("k")), post_arms),
            });
            sig.logic.insert(
                f.post.clone(),
                LogicSig { params: vec![kty.clone(), f.dom.clone(), f.cod.clone()], ret: Ty::Bool, predicate: true, builtin: false },
            );
            applies.push(FoFun {
                name: f.apply.clone(),
                params: vec![("k".into(), kty), (f.arg_name.clone(), f.dom.clone())],
                ret: f.cod.clone(),
                requires: vec![],
                ensures: vec![Formula::app(
                    &f.post,
                    vec![Formula::var("k"), Formula::var(&f.arg_name), Formula::var("result")],
                )],
                body: FoExpr::new(FoKind::Match(Box::new(k), apply_arms), f.cod.clone()),
                kind: FunKind::Apply(f.index),
                bypassed: false,
                loc: Loc::default(),
            });
        }

        let mut functions = applies;
        functions.extend(user);
        let groups = call_groups(&functions);
        let sites = std::mem::take(&mut self.sites);
        Ok(TargetProgram { types, logic, families, sites, posts, lemmas, functions, groups, sig })
    }

    fn site_ref(&self, id: usize) -> &LambdaSite {
        self.sites.iter().find(|s| s.id == id).expect("site id")
    }
}

/// Strongly connected components of the call graph, callees first. All
/// apply functions share one node.
fn call_groups(functions: &[FoFun]) -> Vec<Vec<String>> {
    let mut g: DiGraph<Vec<usize>, ()> = DiGraph::new();
    let mut node_of: HashMap<&str, NodeIndex> = HashMap::new();
    let mut apply_node: Option<NodeIndex> = None;
    for (i, f) in functions.iter().enumerate() {
        let n = match f.kind {
            FunKind::Apply(_) => match apply_node {
                Some(n) => {
                    g[n].push(i);
                    n
                }
                None => {
                    let n = g.add_node(vec![i]);
                    apply_node = Some(n);
                    n
                }
            },
            _ => g.add_node(vec![i]),
        };
        node_of.insert(&f.name, n);
    }
    for f in functions {
        let from = node_of[f.name.as_str()];
        let mut callees: Vec<NodeIndex> = Vec::new();
        f.body.walk(&mut |e| {
            if let FoKind::Call(c, _) = &e.kind {
                let to = match c {
                    Callee::Fun(n) => node_of.get(n.as_str()).copied(),
                    Callee::Apply(_) => apply_node,
                    Callee::Builtin(_) => None,
                };
                if let Some(to) = to {
                    if !callees.contains(&to) {
                        callees.push(to);
                    }
                }
            }
        });
        for to in callees {
            g.update_edge(from, to, ());
        }
    }
    petgraph::algo::tarjan_scc(&g)
        .into_iter()
        .map(|scc| {
            let mut idx: Vec<usize> = scc.into_iter().flat_map(|n| g[n].clone()).collect();
            idx.sort_unstable();
            idx.into_iter().map(|i| functions[i].name.clone()).collect()
        })
        .collect()
}

/// Every identifier of the source program, so generated names avoid them.
fn program_names(tp: &TypedProgram) -> HashSet<String> {
    let mut out: HashSet<String> = HashSet::new();
    for (n, d) in &tp.sig.datatypes {
        out.insert(n.clone());
        out.extend(d.variants.iter().map(|v| v.name.clone()));
    }
    out.extend(tp.sig.logic.keys().cloned());
    let spec_names = |s: &Spec, out: &mut HashSet<String>| {
        out.extend(s.result_names.iter().cloned());
        out.extend(s.arg_names.iter().cloned());
        for f in s.requires.iter().chain(&s.ensures) {
            out.extend(f.all_names());
        }
    };
    fn pat_names(p: &Pattern, out: &mut HashSet<String>) {
        out.extend(p.vars());
        if let Pattern::Ctor(c, _) = p {
            out.insert(c.clone());
        }
    }
    let mut exprs: Vec<&Expr> = Vec::new();
    for l in &tp.program.prelude {
        out.insert(l.name.clone());
        out.extend(l.params.iter().map(|(n, _)| n.clone()));
        if let Some(b) = &l.body {
            out.extend(b.all_names());
        }
    }
    for item in &tp.program.items {
        match item {
            TopLevel::LetDef(d) => {
                out.insert(d.name.clone());
                out.extend(d.params.iter().map(|p| p.name.clone()));
                if let Some(s) = &d.spec {
                    spec_names(s, &mut out);
                }
                exprs.push(&d.body);
            }
            TopLevel::Expr(e) => exprs.push(e),
            TopLevel::Lemma(l) => {
                out.insert(l.name.clone());
                out.extend(l.formula.all_names());
            }
            TopLevel::TypeDecl(_) => {}
        }
    }
    for e in exprs {
        map_expr(e, &mut |e| {
            match &e.kind {
                ExprKind::Var(x) => {
                    out.insert(x.clone());
                }
                ExprKind::Ctor(c, _) => {
                    out.insert(c.clone());
                }
                ExprKind::LetIn(d, _) => {
                    out.insert(d.name.clone());
                    out.extend(d.params.iter().map(|p| p.name.clone()));
                    if let Some(s) = &d.spec {
                        spec_names(s, &mut out);
                    }
                }
                ExprKind::Match(_, arms) => arms.iter().for_each(|(p, _)| pat_names(p, &mut out)),
                ExprKind::Lambda(l) => {
                    out.extend(l.params.iter().map(|p| p.name.clone()));
                    if let Some(s) = &l.spec {
                        spec_names(s, &mut out);
                    }
                }
                _ => {}
            }
            None
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_program;
    use crate::typing::check_program;

    fn defun(src: &str) -> DResult<TargetProgram> {
        defunctionalize(&check_program(&parse_program(src).unwrap()).unwrap())
    }

    const LENGTH: &str = "\
let rec length_cps (l : int list) (k : int -> int) : int =
  match l with
  | [] -> k 0
  | _ :: t -> length_cps t (fun [@gospel {| ensures post (k : int -> int) (l + 1) result |}] (l : int) : int -> k (1 + l))
(*@ r = length_cps l k
    ensures post (k : int -> int) (length l) r *)

let len (l : int list) : int = length_cps l (fun [@gospel {| ensures result = x |}] (x : int) : int -> x)
(*@ r = len l
    ensures length l = r *)
";

    #[test]
    fn length_has_one_family_two_constructors() {
        let t = defun(LENGTH).unwrap();
        assert_eq!(t.families.len(), 1);
        assert_eq!(t.families[0].sites.len(), 2);
        assert_eq!(t.posts.len(), 1);
        assert_eq!(t.site(0).captured, vec![("k".to_string(), Ty::named("kont0"))]);
        assert!(t.site(1).captured.is_empty());
        t.check_first_order().unwrap();
        t.check_families().unwrap();
        t.check_captures().unwrap();
    }

    #[test]
    fn curried_lambda_families() {
        let t = defun("let f (y : int) : int -> int -> int = fun (x : int) (z : int) : int -> x + y").unwrap();
        assert_eq!(t.families.len(), 2);
        let inner = t.site(1);
        assert_eq!(inner.captured.iter().map(|(n, _)| n.as_str()).collect::<Vec<_>>(), vec!["y", "x"]);
        let outer = t.site(0);
        assert_eq!(outer.post, Formula::eq(
            Formula::var("result"),
            Formula::Ctor("K1".into(), vec![Formula::var("y"), Formula::var("x")]),
        ));
    }

    #[test]
    fn application_chain() {
        let t = defun(
            "let g (k : int -> int -> int) : int = (k 3) 4\nlet h (u : unit) : int = g (fun (a : int) (b : int) : int -> a - b)",
        )
        .unwrap();
        let g = t.function("g").unwrap();
        let FoKind::Call(Callee::Apply(outer), args) = &g.body.kind else { panic!("{:?}", g.body) };
        let FoKind::Call(Callee::Apply(inner), _) = &args[0].kind else { panic!() };
        assert_ne!(outer, inner);
        assert_eq!(t.families[*inner].arrow_ty, Ty::arrows([Ty::Int, Ty::Int], Ty::Int));
    }

    #[test]
    fn no_family_error() {
        let e = defun("let app (f : int -> bool) (x : int) : bool = f x").unwrap_err();
        assert!(matches!(e, DefuncError::NoFamily { .. }), "{e}");
    }

    #[test]
    fn exempt_as_value_error() {
        let e = defun(
            "let pos (x : int) : int = x (*@ r = pos x requires x > 0 *)\n\
             let app (f : int -> int) : int = f 1\nlet use (u : unit) : int = app pos",
        )
        .unwrap_err();
        assert!(matches!(e, DefuncError::ExemptAsValue { ref name, .. } if name == "pos"), "{e}");
    }

    #[test]
    fn global_function_as_value_gets_eta_sites() {
        let t = defun(
            "let add (a : int) (b : int) : int = a + b\n\
             let app (f : int -> int) : int = f 1\nlet use (u : unit) : int = app (add 2)",
        )
        .unwrap();
        assert_eq!(t.sites.len(), 1);
        assert_eq!(t.sites[0].eta_of.as_deref(), Some("add"));
        t.check_first_order().unwrap();
    }

    #[test]
    fn non_exhaustive_match_gets_absurd_arm() {
        let t = defun("let hd (l : int list) : int = match l with x :: _ -> x").unwrap();
        let FoKind::Match(_, arms) = &t.function("hd").unwrap().body.kind else { panic!() };
        assert_eq!(arms.last().unwrap().0, Pattern::Wildcard);
        assert_eq!(arms.last().unwrap().1.kind, FoKind::Absurd);
    }

    #[test]
    fn generated_names_avoid_user_names() {
        let t = defun(
            "let apply0 (x : int) : int = x\nlet f (u : unit) : int = (fun (y : int) : int -> apply0 y) 1",
        )
        .unwrap();
        assert_eq!(t.families[0].apply, "apply0_g");
    }
}
