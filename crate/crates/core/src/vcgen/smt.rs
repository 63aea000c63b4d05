//! SMT-LIB2 rendering of verification conditions. Data types are
//! monomorphized into one sort per instance; logic symbols, post
//! predicates and the list/tree library become recursive definitions.

use std::collections::HashMap;
use std::fmt::Write as _;

use indexmap::IndexMap;

use crate::ast::{BinOp, Ty, UnOp};
use crate::defunc::TargetProgram;

use super::term::{Env, Lower, Term, VcKind};
use super::wp::Vc;
use super::VcError;

/// Words that cannot name a user symbol.
const RESERVED: &[&str] = &[
    "!", "_", "as", "let", "forall", "exists", "match", "par", "true", "false", "not", "and", "or", "xor", "=>",
    "=", "distinct", "ite", "div", "mod", "abs", "min", "max", "to_real", "to_int", "is_int", "Int", "Bool",
    "Real", "tt", "int_max", "int_min", "int_abs", "cdiv", "assert", "check-sat",
];

fn simple_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || "~!@$%^&*_-+=<>.?/".contains(c)
}

/// A user identifier as an SMT symbol distinct from every theory symbol.
pub fn symbol(name: &str) -> String {
    if RESERVED.contains(&name) {
        format!("{name}_")
    } else if name.chars().all(simple_char) && !name.starts_with(|c: char| c.is_ascii_digit()) {
        name.to_string()
    } else {
        format!("|{name}|")
    }
}

fn mangle(t: &Ty) -> String {
    match t {
        Ty::Int => "int".into(),
        Ty::Bool => "bool".into(),
        Ty::Unit => "unit".into(),
        Ty::Named(n, args) if args.is_empty() => n.clone(),
        Ty::Named(n, args) => format!("{n}_{}", args.iter().map(mangle).collect::<Vec<_>>().join("_")),
        Ty::Tuple(ts) if ts.is_empty() => "unit".into(),
        Ty::Tuple(ts) => format!("tuple{}_{}", ts.len(), ts.iter().map(mangle).collect::<Vec<_>>().join("_")),
        Ty::Arrow(a, b) => format!("fn_{}_{}", mangle(a), mangle(b)),
        Ty::Param(p) => p.clone(),
    }
}

/// Sort name of a type.
pub fn sort(t: &Ty) -> String {
    match t {
        Ty::Int => "Int".into(),
        Ty::Bool => "Bool".into(),
        Ty::Named(_, args) if args.is_empty() => symbol(&mangle(t)),
        t => mangle(t),
    }
}

/// Constructor name at an instance: generic types get the instance
/// appended so every constructor names one sort.
fn ctor_name(c: Option<&str>, t: &Ty) -> String {
    match (c, t) {
        (_, Ty::Unit) => "tt".into(),
        (_, Ty::Tuple(ts)) if ts.is_empty() => "tt".into(),
        (None, t) => format!("mk_{}", mangle(t)),
        (Some(c), Ty::Named(_, args)) if !args.is_empty() => format!("{c}_{}", mangle(t)),
        (Some(c), _) => symbol(c),
    }
}

fn selector(c: Option<&str>, i: usize, t: &Ty) -> String {
    let base = ctor_name(c, t);
    match base.strip_prefix('|').and_then(|b| b.strip_suffix('|')) {
        Some(inner) => format!("|{inner}_{i}|"),
        None => format!("{base}_{i}"),
    }
}

struct SortDef {
    ty: Ty,
    /// Constructor and field types (`None` for a tuple's constructor).
    ctors: Vec<(Option<String>, Vec<Ty>)>,
}

pub struct Smt<'t> {
    t: &'t TargetProgram,
    sorts: IndexMap<String, SortDef>,
}

impl<'t> Smt<'t> {
    pub fn new(t: &'t TargetProgram) -> Self {
        let mut s = Smt { t, sorts: IndexMap::new() };
        for f in &t.functions {
            f.params.iter().for_each(|(_, ty)| s.add_sort(ty));
            s.add_sort(&f.ret);
        }
        for d in &t.types {
            if d.params.is_empty() {
                s.add_sort(&Ty::Named(d.name.clone(), vec![]));
            }
        }
        for l in &t.logic {
            l.params.iter().for_each(|(_, ty)| s.add_sort(ty));
            s.add_sort(&l.ret);
        }
        for p in &t.posts {
            p.params.iter().for_each(|(_, ty)| s.add_sort(ty));
        }
        s
    }

    fn add_sort(&mut self, t: &Ty) {
        let ctors: Vec<(Option<String>, Vec<Ty>)> = match t {
            Ty::Int | Ty::Bool | Ty::Param(_) | Ty::Arrow(..) => return,
            Ty::Unit => vec![(None, vec![])],
            Ty::Tuple(ts) if ts.is_empty() => vec![(None, vec![])],
            Ty::Tuple(ts) => vec![(None, ts.clone())],
            Ty::Named(n, args) => match self.t.sig.datatypes.get(n) {
                Some(d) => d
                    .variants
                    .iter()
                    .map(|v| (Some(v.name.clone()), self.t.sig.ctor_fields(&v.name, args).unwrap_or_default()))
                    .collect(),
                None => return,
            },
        };
        let name = sort(t);
        if self.sorts.contains_key(&name) {
            return;
        }
        self.sorts.insert(name, SortDef { ty: t.clone(), ctors: ctors.clone() });
        for (_, fs) in &ctors {
            fs.iter().for_each(|f| self.add_sort(f));
        }
    }

    fn add_term_sorts(&mut self, t: &Term) {
        let mut tys = Vec::new();
        t.walk(&mut |x| match x {
            Term::Var(_, ty) | Term::Ctor(_, _, ty) | Term::Sel(_, _, _, ty) => tys.push(ty.clone()),
            Term::Tuple(_) => tys.push(x.ty()),
            Term::Forall(bs, _) => tys.extend(bs.iter().map(|(_, ty)| ty.clone())),
            _ => {}
        });
        tys.iter().for_each(|ty| self.add_sort(ty));
    }

    fn is_library(&self, g: &str) -> bool {
        matches!(g, "length" | "height" | "max" | "min" | "abs") && !self.t.logic.iter().any(|l| l.name == g)
    }

    pub fn term(&self, t: &Term) -> String {
        let mut out = String::new();
        self.write(t, &mut out);
        out
    }

    fn write(&self, t: &Term, out: &mut String) {
        let list = |s: &Self, head: &str, xs: &[&Term], out: &mut String| {
            out.push('(');
            out.push_str(head);
            for x in xs {
                out.push(' ');
                s.write(x, out);
            }
            out.push(')');
        };
        match t {
            Term::Var(x, _) => out.push_str(&symbol(x)),
            Term::Int(n) if *n < 0 => write!(out, "(- {})", n.unsigned_abs()).unwrap(),
            Term::Int(n) => write!(out, "{n}").unwrap(),
            Term::Bool(b) => write!(out, "{b}").unwrap(),
            Term::Unit => out.push_str("tt"),
            Term::Ctor(c, xs, ty) if xs.is_empty() => out.push_str(&ctor_name(Some(c), ty)),
            Term::Ctor(c, xs, ty) => list(self, &ctor_name(Some(c), ty), &xs.iter().collect::<Vec<_>>(), out),
            Term::Tuple(xs) if xs.is_empty() => out.push_str("tt"),
            Term::Tuple(xs) => list(self, &ctor_name(None, &t.ty()), &xs.iter().collect::<Vec<_>>(), out),
            Term::Sel(c, i, s, _) => list(self, &selector(c.as_deref(), *i, &s.ty()), &[s], out),
            Term::Is(c, s) => list(self, &format!("(_ is {})", ctor_name(Some(c), &s.ty())), &[s], out),
            Term::App(g, xs, _) => {
                let head = if self.is_library(g) {
                    match g.as_str() {
                        "max" | "min" | "abs" => format!("int_{g}"),
                        _ => format!("{g}_{}", mangle(&xs[0].ty())),
                    }
                } else {
                    symbol(g)
                };
                if xs.is_empty() {
                    out.push_str(&head);
                } else {
                    list(self, &head, &xs.iter().collect::<Vec<_>>(), out);
                }
            }
            Term::Bin(BinOp::Ne, a, b) => {
                out.push_str("(not ");
                list(self, "=", &[a, b], out);
                out.push(')');
            }
            Term::Bin(op, a, b) => {
                let head = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "cdiv",
                    BinOp::Eq => "=",
                    BinOp::Lt => "<",
                    BinOp::Le => "<=",
                    BinOp::Gt => ">",
                    BinOp::Ge => ">=",
                    BinOp::And => "and",
                    BinOp::Or => "or",
                    BinOp::Ne => unreachable!(),
                };
                list(self, head, &[a, b], out);
            }
            Term::Un(UnOp::Not, a) => list(self, "not", &[a], out),
            Term::Un(UnOp::Neg, a) => list(self, "-", &[a], out),
            Term::Implies(a, b) => list(self, "=>", &[a, b], out),
            Term::Forall(bs, body) => {
                out.push_str("(forall (");
                let bs: Vec<String> = bs.iter().map(|(x, ty)| format!("({} {})", symbol(x), sort(ty))).collect();
                out.push_str(&bs.join(" "));
                out.push_str(") ");
                self.write(body, out);
                out.push(')');
            }
            Term::Let(x, v, body) => {
                write!(out, "(let (({} ", symbol(x)).unwrap();
                self.write(v, out);
                out.push_str(")) ");
                self.write(body, out);
                out.push(')');
            }
            Term::Ite(c, a, b) => list(self, "ite", &[c, a, b], out),
            Term::Label(_, a) => self.write(a, out),
        }
    }

    fn datatypes(&self, out: &mut String) {
        if self.sorts.is_empty() {
            return;
        }
        let heads: Vec<String> = self.sorts.keys().map(|n| format!("({n} 0)")).collect();
        writeln!(out, "(declare-datatypes ({})", heads.join(" ")).unwrap();
        out.push_str("  (");
        let mut first = true;
        for def in self.sorts.values() {
            if !first {
                out.push_str("\n   ");
            }
            first = false;
            out.push('(');
            let ctors: Vec<String> = def
                .ctors
                .iter()
                .map(|(c, fs)| {
                    let mut s = format!("({}", ctor_name(c.as_deref(), &def.ty));
                    for (i, f) in fs.iter().enumerate() {
                        write!(s, " ({} {})", selector(c.as_deref(), i, &def.ty), sort(f)).unwrap();
                    }
                    s.push(')');
                    s
                })
                .collect();
            out.push_str(&ctors.join(" "));
            out.push(')');
        }
        out.push_str("))\n");
    }

    /// Declarations shared by every obligation of the program.
    pub fn prelude(&self) -> Result<String, VcError> {
        let mut out = String::new();
        self.datatypes(&mut out);
        out.push_str("(define-fun int_max ((a Int) (b Int)) Int (ite (>= a b) a b))\n");
        out.push_str("(define-fun int_min ((a Int) (b Int)) Int (ite (<= a b) a b))\n");
        out.push_str("(define-fun int_abs ((a Int)) Int (ite (>= a 0) a (- a)))\n");
        out.push_str(
            "(define-fun cdiv ((a Int) (b Int)) Int\n  \
             (ite (or (>= a 0) (= (mod a b) 0)) (div a b) (ite (> b 0) (+ (div a b) 1) (- (div a b) 1))))\n",
        );

        // Recursive definitions: library functions per instance, user logic
        // with bodies, then post predicates.
        let mut heads: Vec<String> = Vec::new();
        let mut bodies: Vec<String> = Vec::new();
        for def in self.sorts.values() {
            let Ty::Named(n, args) = &def.ty else { continue };
            if args.len() != 1 || !self.is_library(if n == "list" { "length" } else { "height" }) {
                continue;
            }
            let s = sort(&def.ty);
            let is = |c: &str| format!("((_ is {}) x)", ctor_name(Some(c), &def.ty));
            let sel = |c: &str, i: usize| format!("({} x)", selector(Some(c), i, &def.ty));
            match n.as_str() {
                "list" => {
                    heads.push(format!("(length_{s} ((x {s})) Int)"));
                    bodies.push(format!("(ite {} 0 (+ 1 (length_{s} {})))", is("Nil"), sel("Cons", 1)));
                }
                "tree" => {
                    heads.push(format!("(height_{s} ((x {s})) Int)"));
                    bodies.push(format!(
                        "(ite {} 0 (+ 1 (int_max (height_{s} {}) (height_{s} {}))))",
                        is("Empty"),
                        sel("Node", 0),
                        sel("Node", 2)
                    ));
                }
                _ => {}
            }
        }
        let mut uninterpreted = Vec::new();
        let defs = self
            .t
            .logic
            .iter()
            .map(|l| (&l.name, &l.params, if l.predicate { Ty::Bool } else { l.ret.clone() }, l.body.as_ref()))
            .chain(self.t.posts.iter().map(|p| (&p.name, &p.params, Ty::Bool, Some(&p.body))));
        for (name, params, ret, body) in defs {
            let sig = params.iter().map(|(x, ty)| format!("({} {})", symbol(x), sort(ty))).collect::<Vec<_>>();
            let Some(body) = body else {
                let sorts = params.iter().map(|(_, ty)| sort(ty)).collect::<Vec<_>>();
                uninterpreted.push(format!("(declare-fun {} ({}) {})", symbol(name), sorts.join(" "), sort(&ret)));
                continue;
            };
            let mut lower = Lower::new(&self.t.sig);
            let env: Env = params.iter().map(|(x, ty)| (x.clone(), Term::Var(x.clone(), ty.clone()))).collect();
            params.iter().for_each(|(x, _)| lower.names.reserve(x));
            let term = lower.formula(body, &env, Some(&ret))?;
            heads.push(format!("({} ({}) {})", symbol(name), sig.join(" "), sort(&ret)));
            bodies.push(self.term(&term));
        }
        for u in uninterpreted {
            writeln!(out, "{u}").unwrap();
        }
        if !heads.is_empty() {
            out.push_str("(define-funs-rec\n  (");
            out.push_str(&heads.join("\n   "));
            out.push_str(")\n  (");
            out.push_str(&bodies.join("\n   "));
            out.push_str("))\n");
        }
        Ok(out)
    }
}

pub fn kind_text(k: &VcKind) -> String {
    match k {
        VcKind::Postcondition => "postcondition".into(),
        VcKind::Precondition { callee } => format!("precondition of `{callee}`"),
        VcKind::Unreachable => "unreachable branch".into(),
        VcKind::Lemma => "lemma".into(),
    }
}

/// One SMT-LIB2 script per obligation, as `(name, text)`. Each is
/// unsatisfiable exactly when its obligation is valid.
pub fn emit_smt(vcs: &[Vc], t: &TargetProgram) -> Result<Vec<(String, String)>, VcError> {
    let mut smt = Smt::new(t);
    for vc in vcs {
        vc.vars.iter().for_each(|(_, ty)| smt.add_sort(ty));
        vc.hypotheses.iter().chain(std::iter::once(&vc.goal)).for_each(|h| smt.add_term_sorts(h));
    }
    let prelude = smt.prelude()?;
    let mut out = Vec::new();
    for vc in vcs {
        let mut s = String::new();
        writeln!(s, "; {}: {} of `{}`", vc.name, kind_text(&vc.kind), vc.def).unwrap();
        s.push_str("(set-logic ALL)\n");
        s.push_str(&prelude);
        for (x, ty) in &vc.vars {
            writeln!(s, "(declare-const {} {})", symbol(x), sort(ty)).unwrap();
        }
        for h in &vc.hypotheses {
            writeln!(s, "(assert {})", smt.term(h)).unwrap();
        }
        writeln!(s, "(assert (not {}))", smt.term(&vc.goal)).unwrap();
        s.push_str("(check-sat)\n");
        out.push((vc.name.clone(), s));
    }
    Ok(out)
}

/// Expected solver answers per obligation name, from `name status` lines.
pub fn parse_expectations(text: &str) -> HashMap<String, String> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter_map(|l| {
            let mut it = l.split_whitespace();
            Some((it.next()?.to_string(), it.next()?.to_string()))
        })
        .collect()
}
