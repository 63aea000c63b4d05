//! Canonical source text for a surface [`Program`]. Every non-atomic
//! operand is parenthesized, so parsing the output gives back an equal AST.

use std::fmt::Write as _;

use crate::ast::*;

fn is_atomic(e: &Expr) -> bool {
    match &e.kind {
        ExprKind::Unit | ExprKind::Var(_) | ExprKind::Bool(_) | ExprKind::Nil | ExprKind::Tuple(_) => true,
        ExprKind::Int(n) => *n >= 0,
        ExprKind::Ctor(_, args) => args.is_empty(),
        _ => false,
    }
}

fn atom(e: &Expr) -> String {
    if is_atomic(e) {
        expr(e)
    } else {
        format!("({})", expr(e))
    }
}

/// Ctor arguments: one atom, or a parenthesized list that the parser
/// flattens back into separate arguments.
fn ctor_args(args: &[Expr]) -> String {
    match args {
        [] => String::new(),
        [a] if !matches!(a.kind, ExprKind::Tuple(_)) => format!(" {}", atom(a)),
        _ => format!(" ({})", args.iter().map(expr_noseq).collect::<Vec<_>>().join(", ")),
    }
}

fn expr_noseq(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Seq(..) => format!("({})", expr(e)),
        _ => expr(e),
    }
}

pub fn ty_tuple(t: &Ty) -> String {
    match t {
        Ty::Arrow(..) => format!("({t})"),
        _ => t.to_string(),
    }
}

fn param(p: &Param) -> String {
    match &p.ty {
        Some(t) => format!("({} : {t})", p.name),
        None => p.name.clone(),
    }
}

fn spec_text(s: &Spec) -> String {
    let mut out = String::new();
    if s.has_header() {
        write!(out, "{} = {}", s.result_names.join(", "), s.fn_name.as_deref().unwrap_or("_")).unwrap();
        for a in &s.arg_names {
            write!(out, " {a}").unwrap();
        }
    }
    for r in &s.requires {
        write!(out, "\n    requires {}", formula(r)).unwrap();
    }
    for e in &s.ensures {
        write!(out, "\n    ensures {}", formula(e)).unwrap();
    }
    out.trim_start().to_string()
}

pub fn expr(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Unit => "()".into(),
        ExprKind::Var(x) => x.clone(),
        ExprKind::Int(n) => n.to_string(),
        ExprKind::Bool(b) => b.to_string(),
        ExprKind::Nil => "[]".into(),
        ExprKind::Ctor(c, args) => format!("{c}{}", ctor_args(args)),
        ExprKind::Tuple(xs) => format!("({})", xs.iter().map(expr_noseq).collect::<Vec<_>>().join(", ")),
        ExprKind::BinOp(op, a, b) => format!("{} {} {}", atom(a), op.symbol(), atom(b)),
        ExprKind::UnOp(UnOp::Neg, a) => format!("-{}", atom(a)),
        ExprKind::UnOp(UnOp::Not, a) => format!("not {}", atom(a)),
        ExprKind::Cons(h, t) => format!("{} :: {}", atom(h), atom(t)),
        ExprKind::Seq(a, b) => {
            let lhs = match a.kind {
                ExprKind::Seq(..) | ExprKind::LetIn(..) | ExprKind::Match(..) | ExprKind::Lambda(_) => {
                    format!("({})", expr(a))
                }
                _ => expr_noseq(a),
            };
            format!("{lhs}; {}", expr(b))
        }
        ExprKind::LetIn(d, body) => format!("let {} in {}", let_def(d), expr(body)),
        ExprKind::Match(s, arms) => {
            let mut out = format!("match {} with", expr(s));
            for (p, b) in arms {
                write!(out, " | {} -> {}", pattern(p), expr(b)).unwrap();
            }
            out.push_str(" end");
            out
        }
        ExprKind::If(c, a, b) => format!("if {} then {} else {}", expr(c), atom(a), atom(b)),
        ExprKind::Lambda(l) => {
            let mut out = "fun ".to_string();
            if let Some(s) = &l.spec {
                write!(out, "[@gospel {{| {} |}}] ", spec_text(s)).unwrap();
            }
            out.push_str(&l.params.iter().map(param).collect::<Vec<_>>().join(" "));
            if let Some(r) = &l.ret {
                write!(out, " : {}", ty_tuple(r)).unwrap();
            }
            write!(out, " -> {}", expr(&l.body)).unwrap();
            out
        }
        ExprKind::App(f, a) => {
            let head = match f.kind {
                ExprKind::App(..) => expr(f),
                _ => atom(f),
            };
            format!("{head} {}", atom(a))
        }
    }
}

fn let_def(d: &LetDef) -> String {
    let mut out = String::new();
    if d.is_rec {
        out.push_str("rec ");
    }
    out.push_str(&d.name);
    for p in &d.params {
        write!(out, " {}", param(p)).unwrap();
    }
    if let Some(r) = &d.ret {
        write!(out, " : {r}").unwrap();
    }
    write!(out, " = {}", expr(&d.body)).unwrap();
    out
}

pub fn pattern(p: &Pattern) -> String {
    fn pat_atom(p: &Pattern) -> String {
        match p {
            Pattern::Cons(..) => format!("({})", pattern(p)),
            Pattern::Ctor(_, args) if !args.is_empty() => format!("({})", pattern(p)),
            Pattern::Int(n) if *n < 0 => format!("({n})"),
            Pattern::Var(x, Some(t)) => format!("({x} : {t})"),
            _ => pattern(p),
        }
    }
    match p {
        Pattern::Wildcard => "_".into(),
        Pattern::Var(x, None) => x.clone(),
        Pattern::Var(x, Some(t)) => format!("({x} : {t})"),
        Pattern::Int(n) => n.to_string(),
        Pattern::Nil => "[]".into(),
        Pattern::Cons(h, t) => format!("{} :: {}", pat_atom(h), pat_atom(t)),
        Pattern::Ctor(c, args) => match args.as_slice() {
            [] => c.clone(),
            [a] if !matches!(a, Pattern::Tuple(xs) if !xs.is_empty()) => format!("{c} {}", pat_atom(a)),
            _ => format!("{c} ({})", args.iter().map(pattern).collect::<Vec<_>>().join(", ")),
        },
        Pattern::Tuple(ps) => format!("({})", ps.iter().map(pattern).collect::<Vec<_>>().join(", ")),
    }
}

fn f_atomic(f: &Formula) -> bool {
    match f {
        Formula::Var(_) | Formula::True | Formula::False | Formula::Unit | Formula::Tuple(_) => true,
        Formula::Int(n) => *n >= 0,
        Formula::Ctor(_, args) => args.is_empty(),
        _ => false,
    }
}

fn f_atom(f: &Formula) -> String {
    if f_atomic(f) {
        formula(f)
    } else {
        format!("({})", formula(f))
    }
}

pub fn formula(f: &Formula) -> String {
    match f {
        Formula::Var(x) => x.clone(),
        Formula::Int(n) => n.to_string(),
        Formula::True => "true".into(),
        Formula::False => "false".into(),
        Formula::Unit => "()".into(),
        Formula::Ctor(c, args) => match args.as_slice() {
            [a @ Formula::Tuple(_)] => format!("{c} ({})", formula(a)),
            _ => {
                let mut out = c.clone();
                for a in args {
                    write!(out, " {}", f_atom(a)).unwrap();
                }
                out
            }
        },
        Formula::Tuple(xs) => format!("({})", xs.iter().map(formula).collect::<Vec<_>>().join(", ")),
        Formula::App(g, args) if args.is_empty() => g.clone(),
        Formula::App(g, args) => {
            let mut out = g.clone();
            for a in args {
                write!(out, " {}", f_atom(a)).unwrap();
            }
            out
        }
        Formula::Bin(op, a, b) => {
            let sym = match op {
                BinOp::And => "/\\",
                BinOp::Or => "\\/",
                op => op.symbol(),
            };
            format!("{} {sym} {}", f_atom(a), f_atom(b))
        }
        Formula::Un(UnOp::Not, a) => format!("not {}", f_atom(a)),
        Formula::Un(UnOp::Neg, a) => format!("-{}", f_atom(a)),
        Formula::Implies(a, b) => format!("{} -> {}", f_atom(a), f_atom(b)),
        Formula::Forall(bs, body) => {
            let mut out = "forall".to_string();
            for (i, b) in bs.iter().enumerate() {
                let after_untyped = i > 0 && bs[i - 1].ty.is_none();
                match &b.ty {
                    Some(t) if after_untyped => write!(out, ", ({} : {t})", b.name).unwrap(),
                    Some(t) => write!(out, " ({} : {t})", b.name).unwrap(),
                    None => write!(out, " {}", b.name).unwrap(),
                }
            }
            write!(out, ". {}", formula(body)).unwrap();
            out
        }
        Formula::Let(x, v, b) => format!("let {x} = {} in {}", formula(v), formula(b)),
        Formula::Match(s, arms) => {
            let mut out = format!("match {} with", formula(s));
            for (p, b) in arms {
                write!(out, " | {} -> {}", pattern(p), formula(b)).unwrap();
            }
            out.push_str(" end");
            out
        }
        Formula::PostMeta { func, fn_ty, args, result } => {
            let mut out = format!("post ({} : {fn_ty})", formula(func));
            for a in args.iter().chain(std::iter::once(&**result)) {
                write!(out, " {}", f_atom(a)).unwrap();
            }
            out
        }
        Formula::Labeled(_, f) => formula(f),
    }
}

fn variant(v: &Variant) -> String {
    if v.fields.is_empty() {
        return v.name.clone();
    }
    let fs: Vec<String> = v
        .fields
        .iter()
        .map(|t| match t {
            Ty::Arrow(..) | Ty::Tuple(_) => format!("({t})"),
            t => t.to_string(),
        })
        .collect();
    format!("{} of {}", v.name, fs.join(" * "))
}

fn type_decl(d: &TypeDecl) -> String {
    let params = match d.params.as_slice() {
        [] => String::new(),
        [p] => format!("'{p} "),
        ps => format!("({}) ", ps.iter().map(|p| format!("'{p}")).collect::<Vec<_>>().join(", ")),
    };
    let body = match &d.body {
        TypeBody::Variants(vs) => vs.iter().map(|v| format!("\n  | {}", variant(v))).collect::<String>(),
        TypeBody::Record(fs) => {
            format!(" {{ {} }}", fs.iter().map(|(f, t)| format!("{f} : {t}")).collect::<Vec<_>>().join("; "))
        }
        TypeBody::Alias(t) => format!(" {t}"),
    };
    format!("type {params}{} ={body}", d.name)
}

fn logic_decl(l: &LogicDecl) -> String {
    let mut out = format!("(*@ {} {}", if l.predicate { "predicate" } else { "function" }, l.name);
    for (x, t) in &l.params {
        write!(out, " ({x} : {t})").unwrap();
    }
    if !l.predicate {
        write!(out, " : {}", l.ret).unwrap();
    }
    if let Some(b) = &l.body {
        write!(out, " =\n    {}", formula(b)).unwrap();
    }
    out.push_str(" *)");
    out
}

pub fn emit_surface(p: &Program) -> String {
    let mut out: Vec<String> = p.prelude.iter().map(logic_decl).collect();
    for (i, item) in p.items.iter().enumerate() {
        let next_is_expr = matches!(p.items.get(i + 1), Some(TopLevel::Expr(_)));
        let text = match item {
            TopLevel::TypeDecl(d) => type_decl(d),
            TopLevel::Lemma(l) => format!("(*@ lemma {} : {} *)", l.name, formula(&l.formula)),
            TopLevel::Expr(e) => format!("{};;", expr(e)),
            TopLevel::LetDef(d) => {
                let mut s = format!("let {}", let_def(d));
                if let Some(spec) = &d.spec {
                    write!(s, "\n(*@ {} *)", spec_text(spec)).unwrap();
                }
                if next_is_expr {
                    s.push_str(";;");
                }
                s
            }
        };
        out.push(text);
    }
    let mut s = out.join("\n\n");
    if !s.is_empty() {
        s.push('\n');
    }
    s
}
