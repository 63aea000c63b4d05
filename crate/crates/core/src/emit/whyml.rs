//! A WhyML syntax tree for the first-order output, its printer, and the
//! translation from a [`TargetProgram`].
//!
//! Printing parenthesizes every non-atomic operand, so the printed text
//! parses back to the same tree and re-prints byte for byte.

use std::fmt::Write as _;

use crate::ast::{BinOp, Formula, Pattern, Ty, UnOp};
use crate::defunc::{Callee, FoExpr, FoFun, FoKind, FunKind, TargetProgram};
use crate::typing::DataType;

use super::{STDLIB, WHYML_KEYWORDS};

#[derive(Clone, Debug, PartialEq)]
pub enum Term {
    Var(String),
    Int(i64),
    Bool(bool),
    Unit,
    /// Function, predicate or constructor applied to at least one argument.
    App(String, Vec<Term>),
    Tuple(Vec<Term>),
    Bin(String, Box<Term>, Box<Term>),
    Not(Box<Term>),
    Neg(Box<Term>),
    Implies(Box<Term>, Box<Term>),
    Forall(Vec<(String, Ty)>, Box<Term>),
    Let(String, Box<Term>, Box<Term>),
    Match(Box<Term>, Vec<(Pat, Term)>),
    If(Box<Term>, Box<Term>, Box<Term>),
    Seq(Box<Term>, Box<Term>),
    Absurd,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Pat {
    Wildcard,
    Var(String),
    Int(i64),
    Ctor(String, Vec<Pat>),
    /// Empty for `()`.
    Tuple(Vec<Pat>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum TypeBody {
    Variants(Vec<(String, Vec<Ty>)>),
    Record(Vec<(String, Ty)>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct TypeDef {
    pub name: String,
    pub params: Vec<String>,
    pub body: TypeBody,
}

/// A logic function, or a predicate when `ret` is `None`.
#[derive(Clone, Debug, PartialEq)]
pub struct LogicDef {
    pub name: String,
    pub params: Vec<(String, Ty)>,
    pub ret: Option<Ty>,
    pub body: Option<Term>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FunDef {
    /// Marked `function`, usable in specifications.
    pub function: bool,
    pub name: String,
    pub params: Vec<(String, Ty)>,
    pub ret: Ty,
    pub requires: Vec<Term>,
    pub ensures: Vec<Term>,
    pub body: Term,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Decl {
    Use(String),
    Types(Vec<TypeDef>),
    Logic(Vec<LogicDef>),
    Lemma(String, Term),
    Funs { rec: bool, funs: Vec<FunDef> },
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Module {
    pub decls: Vec<Decl>,
}

impl Term {
    /// Application, or the bare name when there are no arguments.
    pub fn app(f: &str, args: Vec<Term>) -> Term {
        if args.is_empty() {
            Term::Var(f.into())
        } else {
            Term::App(f.into(), args)
        }
    }

    fn is_atomic(&self) -> bool {
        match self {
            Term::Var(_) | Term::Bool(_) | Term::Unit | Term::Tuple(_) | Term::Absurd => true,
            Term::Int(n) => *n >= 0,
            _ => false,
        }
    }
}

/// Escapes identifiers that are WhyML keywords.
pub fn ident(name: &str) -> String {
    if WHYML_KEYWORDS.contains(&name) {
        format!("{name}_")
    } else {
        name.to_string()
    }
}

// ---- printing ----

pub fn print_ty(t: &Ty) -> String {
    match t {
        Ty::Unit => "unit".into(),
        Ty::Int => "int".into(),
        Ty::Bool => "bool".into(),
        Ty::Param(p) => format!("'{p}"),
        Ty::Named(n, args) => {
            let mut s = n.clone();
            for a in args {
                s.push(' ');
                s.push_str(&ty_atom(a));
            }
            s
        }
        Ty::Tuple(ts) => format!("({})", ts.iter().map(print_ty).collect::<Vec<_>>().join(", ")),
        Ty::Arrow(a, b) => format!("{} -> {}", ty_atom(a), print_ty(b)),
    }
}

fn ty_atom(t: &Ty) -> String {
    match t {
        Ty::Named(_, args) if !args.is_empty() => format!("({})", print_ty(t)),
        Ty::Arrow(..) => format!("({})", print_ty(t)),
        _ => print_ty(t),
    }
}

pub fn print_pat(p: &Pat) -> String {
    match p {
        Pat::Wildcard => "_".into(),
        Pat::Var(x) => x.clone(),
        Pat::Int(n) => n.to_string(),
        Pat::Ctor(c, args) => {
            let mut s = c.clone();
            for a in args {
                s.push(' ');
                match a {
                    Pat::Ctor(_, xs) if !xs.is_empty() => write!(s, "({})", print_pat(a)).unwrap(),
                    Pat::Int(n) if *n < 0 => write!(s, "({n})").unwrap(),
                    _ => s.push_str(&print_pat(a)),
                }
            }
            s
        }
        Pat::Tuple(ps) => format!("({})", ps.iter().map(print_pat).collect::<Vec<_>>().join(", ")),
    }
}

fn atom(t: &Term) -> String {
    if t.is_atomic() {
        inline(t)
    } else {
        format!("({})", inline(t))
    }
}

fn noseq(t: &Term) -> String {
    match t {
        Term::Seq(..) => format!("({})", inline(t)),
        _ => inline(t),
    }
}

fn seq_lhs(t: &Term) -> String {
    match t {
        Term::Seq(..) | Term::Let(..) => format!("({})", inline(t)),
        _ => inline(t),
    }
}

/// Single-line rendering.
pub fn inline(t: &Term) -> String {
    match t {
        Term::Var(x) => x.clone(),
        Term::Int(n) => n.to_string(),
        Term::Bool(b) => b.to_string(),
        Term::Unit => "()".into(),
        Term::App(f, args) => {
            let mut s = f.clone();
            for a in args {
                s.push(' ');
                s.push_str(&atom(a));
            }
            s
        }
        Term::Tuple(ts) => format!("({})", ts.iter().map(noseq).collect::<Vec<_>>().join(", ")),
        Term::Bin(op, a, b) => format!("{} {op} {}", atom(a), atom(b)),
        Term::Not(a) => format!("not {}", atom(a)),
        Term::Neg(a) => format!("-{}", atom(a)),
        Term::Implies(a, b) => format!("{} -> {}", atom(a), atom(b)),
        Term::Forall(bs, body) => format!("forall {}. {}", binders(bs), inline(body)),
        Term::Let(x, v, b) => format!("let {x} = {} in {}", noseq(v), inline(b)),
        Term::Match(s, arms) => {
            let mut out = format!("match {} with", noseq(s));
            for (p, b) in arms {
                write!(out, " | {} -> {}", print_pat(p), inline(b)).unwrap();
            }
            out.push_str(" end");
            out
        }
        Term::If(c, a, b) => format!("if {} then {} else {}", noseq(c), atom(a), atom(b)),
        Term::Seq(a, b) => format!("{}; {}", seq_lhs(a), inline(b)),
        Term::Absurd => "absurd".into(),
    }
}

fn binders(bs: &[(String, Ty)]) -> String {
    bs.iter().map(|(x, t)| format!("{x}: {}", print_ty(t))).collect::<Vec<_>>().join(", ")
}

/// Multi-line rendering of a body starting at column `ind`; same tokens as
/// [`inline`].
fn block(t: &Term, ind: usize) -> String {
    let pad = " ".repeat(ind);
    match t {
        Term::Match(s, arms) => {
            let mut out = format!("match {} with", noseq(s));
            for (p, b) in arms {
                write!(out, "\n{pad}| {} -> {}", print_pat(p), block(b, ind + 4)).unwrap();
            }
            write!(out, "\n{pad}end").unwrap();
            out
        }
        Term::Let(x, v, b) => {
            let sep = if v.is_atomic() { " ".to_string() } else { format!("\n{pad}") };
            format!("let {x} = {} in{sep}{}", noseq(v), block(b, ind))
        }
        Term::Seq(a, b) => format!("{};\n{pad}{}", seq_lhs(a), block(b, ind)),
        _ => inline(t),
    }
}

fn params(ps: &[(String, Ty)]) -> String {
    if ps.is_empty() {
        return " ()".into();
    }
    ps.iter().map(|(x, t)| format!(" ({x} : {})", print_ty(t))).collect()
}

fn print_typedef(out: &mut String, d: &TypeDef) {
    out.push_str(&d.name);
    for p in &d.params {
        write!(out, " '{p}").unwrap();
    }
    out.push_str(" =");
    match &d.body {
        TypeBody::Variants(vs) => {
            for (c, fields) in vs {
                write!(out, "\n  | {c}").unwrap();
                for f in fields {
                    write!(out, " {}", ty_atom(f)).unwrap();
                }
            }
        }
        TypeBody::Record(fs) => {
            let fs: Vec<String> = fs.iter().map(|(f, t)| format!("{f} : {}", print_ty(t))).collect();
            write!(out, " {{ {} }}", fs.join("; ")).unwrap();
        }
    }
}

fn print_logic(out: &mut String, d: &LogicDef) {
    write!(out, "{}", d.name).unwrap();
    for (x, t) in &d.params {
        write!(out, " ({x} : {})", print_ty(t)).unwrap();
    }
    if let Some(r) = &d.ret {
        write!(out, " : {}", print_ty(r)).unwrap();
    }
    if let Some(b) = &d.body {
        write!(out, " =\n  {}", block(b, 2)).unwrap();
    }
}

fn print_fun(out: &mut String, f: &FunDef) {
    if f.function {
        out.push_str("function ");
    }
    write!(out, "{}{} : {}", f.name, params(&f.params), print_ty(&f.ret)).unwrap();
    for r in &f.requires {
        write!(out, "\n  requires {{ {} }}", inline(r)).unwrap();
    }
    for e in &f.ensures {
        write!(out, "\n  ensures {{ {} }}", inline(e)).unwrap();
    }
    write!(out, " =\n  {}", block(&f.body, 2)).unwrap();
}

pub fn print_module(m: &Module) -> String {
    let mut out = String::new();
    let mut prev_use = false;
    for d in &m.decls {
        let is_use = matches!(d, Decl::Use(_));
        if !out.is_empty() {
            out.push_str(if is_use && prev_use { "\n" } else { "\n\n" });
        }
        prev_use = is_use;
        match d {
            Decl::Use(m) => write!(out, "use {m}").unwrap(),
            Decl::Types(ts) => {
                for (i, t) in ts.iter().enumerate() {
                    out.push_str(if i == 0 { "type " } else { "\nwith " });
                    print_typedef(&mut out, t);
                }
            }
            Decl::Logic(ls) => {
                for (i, l) in ls.iter().enumerate() {
                    if i == 0 {
                        out.push_str(if l.ret.is_some() { "function " } else { "predicate " });
                    } else {
                        out.push_str("\nwith ");
                    }
                    print_logic(&mut out, l);
                }
            }
            Decl::Lemma(name, t) => write!(out, "lemma {name}: {}", inline(t)).unwrap(),
            Decl::Funs { rec, funs } => {
                for (i, f) in funs.iter().enumerate() {
                    out.push_str(match (i, rec) {
                        (0, true) => "let rec ",
                        (0, false) => "let ",
                        _ => "\nwith ",
                    });
                    print_fun(&mut out, f);
                }
            }
        }
    }
    out.push('\n');
    out
}

// ---- translation from the target program ----

fn bin_symbol(op: BinOp, logic: bool) -> &'static str {
    match (op, logic) {
        (BinOp::And, true) => "/\\",
        (BinOp::Or, true) => "\\/",
        _ => op.symbol(),
    }
}

fn bin(op: BinOp, a: Term, b: Term, logic: bool) -> Term {
    if op == BinOp::Div {
        return Term::App("div".into(), vec![a, b]);
    }
    Term::Bin(bin_symbol(op, logic).into(), Box::new(a), Box::new(b))
}

fn neg(a: Term) -> Term {
    match a {
        Term::Int(n) => Term::Int(-n),
        a => Term::Neg(Box::new(a)),
    }
}

pub fn pattern(p: &Pattern) -> Pat {
    match p {
        Pattern::Wildcard => Pat::Wildcard,
        Pattern::Var(x, _) => Pat::Var(ident(x)),
        Pattern::Int(n) => Pat::Int(*n),
        Pattern::Nil => Pat::Ctor("Nil".into(), vec![]),
        Pattern::Cons(h, t) => Pat::Ctor("Cons".into(), vec![pattern(h), pattern(t)]),
        Pattern::Ctor(c, ps) => Pat::Ctor(c.clone(), ps.iter().map(pattern).collect()),
        Pattern::Tuple(ps) => Pat::Tuple(ps.iter().map(pattern).collect()),
    }
}

pub fn formula(f: &Formula) -> Term {
    match f {
        Formula::Var(x) => Term::Var(ident(x)),
        Formula::Int(n) => Term::Int(*n),
        Formula::True => Term::Bool(true),
        Formula::False => Term::Bool(false),
        Formula::Unit => Term::Unit,
        Formula::Ctor(c, args) => Term::app(c, args.iter().map(formula).collect()),
        Formula::Tuple(xs) => Term::Tuple(xs.iter().map(formula).collect()),
        Formula::App(g, args) => Term::app(&ident(g), args.iter().map(formula).collect()),
        Formula::Bin(op, a, b) => bin(*op, formula(a), formula(b), true),
        Formula::Un(UnOp::Not, a) => Term::Not(Box::new(formula(a))),
        Formula::Un(UnOp::Neg, a) => neg(formula(a)),
        Formula::Implies(a, b) => Term::Implies(Box::new(formula(a)), Box::new(formula(b))),
        Formula::Forall(bs, body) => Term::Forall(
            bs.iter().map(|b| (ident(&b.name), b.ty.clone().expect("typed binder"))).collect(),
            Box::new(formula(body)),
        ),
        Formula::Let(x, v, b) => Term::Let(ident(x), Box::new(formula(v)), Box::new(formula(b))),
        Formula::Match(s, arms) => Term::Match(
            Box::new(formula(s)),
            arms.iter().map(|(p, b)| (pattern(p), formula(b))).collect(),
        ),
        Formula::PostMeta { func, args, result, .. } => {
            let mut xs = vec![formula(func)];
            xs.extend(args.iter().map(formula));
            xs.push(formula(result));
            Term::App("post".into(), xs)
        }
        Formula::Labeled(_, f) => formula(f),
    }
}

fn expr(t: &TargetProgram, e: &FoExpr) -> Term {
    let b = |x: &FoExpr| Box::new(expr(t, x));
    match &e.kind {
        FoKind::Unit => Term::Unit,
        FoKind::Var(x) => Term::Var(ident(x)),
        FoKind::Int(n) => Term::Int(*n),
        FoKind::Bool(v) => Term::Bool(*v),
        FoKind::Ctor(c, args) => Term::app(c, args.iter().map(|a| expr(t, a)).collect()),
        FoKind::Tuple(xs) => Term::Tuple(xs.iter().map(|a| expr(t, a)).collect()),
        FoKind::BinOp(op, x, y) => bin(*op, expr(t, x), expr(t, y), false),
        FoKind::UnOp(UnOp::Not, x) => Term::Not(b(x)),
        FoKind::UnOp(UnOp::Neg, x) => neg(expr(t, x)),
        FoKind::Seq(x, y) => Term::Seq(b(x), b(y)),
        FoKind::Let(x, v, body) => Term::Let(ident(x), b(v), b(body)),
        FoKind::Match(s, arms) => {
            Term::Match(b(s), arms.iter().map(|(p, a)| (pattern(p), expr(t, a))).collect())
        }
        FoKind::If(c, x, y) => Term::If(b(c), b(x), b(y)),
        FoKind::Call(callee, args) => {
            let name = match callee {
                Callee::Apply(_) | Callee::Builtin(_) => t.callee_name(callee),
                Callee::Fun(f) => ident(f),
            };
            let args = if args.is_empty() { vec![Term::Unit] } else { args.iter().map(|a| expr(t, a)).collect() };
            Term::App(name, args)
        }
        FoKind::Absurd => Term::Absurd,
    }
}

fn typedef(d: &DataType) -> TypeDef {
    let body = match &d.record {
        Some(fs) => TypeBody::Record(fs.iter().map(|(f, t)| (ident(f), t.clone())).collect()),
        None => TypeBody::Variants(d.variants.iter().map(|v| (v.name.clone(), v.fields.clone())).collect()),
    };
    TypeDef { name: ident(&d.name), params: d.params.clone(), body }
}

fn fundef(t: &TargetProgram, f: &FoFun) -> FunDef {
    FunDef {
        function: matches!(f.kind, FunKind::Apply(_)),
        name: ident(&f.name),
        params: f.params.iter().map(|(x, ty)| (ident(x), ty.clone())).collect(),
        ret: f.ret.clone(),
        requires: f.requires.iter().map(formula).collect(),
        ensures: f.ensures.iter().map(formula).collect(),
        body: expr(t, &f.body),
    }
}

/// Module imports, in order.
pub fn imports() -> Vec<&'static str> {
    let mut out: Vec<&str> = Vec::new();
    for (_, module, _) in STDLIB {
        if !out.contains(module) {
            out.push(module);
        }
    }
    out
}

pub fn to_module(t: &TargetProgram) -> Module {
    let mut decls: Vec<Decl> = imports().into_iter().map(|m| Decl::Use(m.into())).collect();
    if !t.types.is_empty() {
        decls.push(Decl::Types(t.types.iter().map(typedef).collect()));
    }
    for l in &t.logic {
        decls.push(Decl::Logic(vec![LogicDef {
            name: ident(&l.name),
            params: l.params.iter().map(|(x, ty)| (ident(x), ty.clone())).collect(),
            ret: if l.predicate { None } else { Some(l.ret.clone()) },
            body: l.body.as_ref().map(formula),
        }]));
    }
    if !t.posts.is_empty() {
        decls.push(Decl::Logic(
            t.posts
                .iter()
                .map(|p| LogicDef {
                    name: p.name.clone(),
                    params: p.params.iter().map(|(x, ty)| (ident(x), ty.clone())).collect(),
                    ret: None,
                    body: Some(formula(&p.body)),
                })
                .collect(),
        ));
    }
    for l in &t.lemmas {
        decls.push(Decl::Lemma(ident(&l.name), formula(&l.formula)));
    }
    for g in &t.groups {
        let funs: Vec<&FoFun> = g.iter().map(|n| t.function(n).expect("grouped function")).collect();
        let rec = funs.len() > 1
            || funs.iter().any(|f| matches!(f.kind, FunKind::Apply(_) | FunKind::Def { is_rec: true }));
        decls.push(Decl::Funs { rec, funs: funs.iter().map(|f| fundef(t, f)).collect() });
    }
    Module { decls }
}
