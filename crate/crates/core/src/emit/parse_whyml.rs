//! Parser for the WhyML subset produced by [`super::whyml::print_module`].
//! Used to check that emitted text re-parses and re-prints identically,
//! and to compare emitted programs against hand-written fixtures.

use crate::ast::Ty;

use super::whyml::{Decl, FunDef, LogicDef, Module, Pat, Term, TypeBody, TypeDef};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {msg}")]
pub struct WhyParseError {
    pub line: usize,
    pub msg: String,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    UIdent(String),
    TyVar(String),
    Int(i64),
    Sym(&'static str),
    Eof,
}

const SYMS: &[&str] = &[
    "->", "/\\", "\\/", "&&", "||", "<>", "<=", ">=", "(", ")", "{", "}", ",", ";", ":", ".", "|", "=",
    "<", ">", "+", "-", "*", "_",
];

const KEYWORDS: &[&str] = &[
    "use", "type", "with", "predicate", "function", "lemma", "let", "rec", "requires", "ensures", "match",
    "end", "if", "then", "else", "not", "forall", "in", "true", "false", "absurd",
];

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, WhyParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = 1;
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            line += 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '(' && chars.get(i + 1) == Some(&'*') {
            let mut depth = 0;
            while i < chars.len() {
                if chars[i] == '(' && chars.get(i + 1) == Some(&'*') {
                    depth += 1;
                    i += 2;
                } else if chars[i] == '*' && chars.get(i + 1) == Some(&')') {
                    depth -= 1;
                    i += 2;
                    if depth == 0 {
                        break;
                    }
                } else {
                    if chars[i] == '\n' {
                        line += 1;
                    }
                    i += 1;
                }
            }
            continue;
        }
        let word = |i: usize| {
            let mut j = i;
            while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_' || chars[j] == '\'') {
                j += 1;
            }
            j
        };
        if c.is_ascii_digit() {
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let s: String = chars[i..j].iter().collect();
            let n = s.parse().map_err(|_| WhyParseError { line, msg: format!("integer `{s}` out of range") })?;
            out.push((Tok::Int(n), line));
            i = j;
            continue;
        }
        if c == '\'' {
            let j = word(i + 1);
            out.push((Tok::TyVar(chars[i + 1..j].iter().collect()), line));
            i = j;
            continue;
        }
        if c.is_alphabetic() || (c == '_' && chars.get(i + 1).is_some_and(|d| d.is_alphanumeric() || *d == '_')) {
            let j = word(i);
            let s: String = chars[i..j].iter().collect();
            out.push((if c.is_uppercase() { Tok::UIdent(s) } else { Tok::Ident(s) }, line));
            i = j;
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match SYMS.iter().find(|s| rest.starts_with(**s)) {
            Some(s) => {
                out.push((Tok::Sym(s), line));
                i += s.len();
            }
            None => return Err(WhyParseError { line, msg: format!("unexpected character `{c}`") }),
        }
    }
    out.push((Tok::Eof, line));
    Ok(out)
}

struct P {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

type R<T> = Result<T, WhyParseError>;

impl P {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, n: usize) -> &Tok {
        &self.toks[(self.pos + n).min(self.toks.len() - 1)].0
    }

    fn next(&mut self) -> Tok {
        let t = self.peek().clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> R<T> {
        Err(WhyParseError { line: self.toks[self.pos].1, msg: format!("{}, found {:?}", msg.into(), self.peek()) })
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(w) if w == k)
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn eat_kw(&mut self, k: &str) -> bool {
        let b = self.is_kw(k);
        if b {
            self.next();
        }
        b
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        let b = self.is_sym(s);
        if b {
            self.next();
        }
        b
    }

    fn kw(&mut self, k: &str) -> R<()> {
        if self.eat_kw(k) {
            Ok(())
        } else {
            self.err(format!("expected `{k}`"))
        }
    }

    fn sym(&mut self, s: &str) -> R<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`"))
        }
    }

    fn ident(&mut self) -> R<String> {
        match self.peek().clone() {
            Tok::Ident(w) if !KEYWORDS.contains(&w.as_str()) => {
                self.next();
                Ok(w)
            }
            _ => self.err("expected identifier"),
        }
    }

    fn uident(&mut self) -> R<String> {
        match self.next() {
            Tok::UIdent(w) => Ok(w),
            _ => {
                self.pos -= 1;
                self.err("expected constructor")
            }
        }
    }

    // ---- declarations ----

    fn module(&mut self) -> R<Module> {
        let mut decls = Vec::new();
        while *self.peek() != Tok::Eof {
            decls.push(self.decl()?);
        }
        Ok(Module { decls })
    }

    fn decl(&mut self) -> R<Decl> {
        if self.eat_kw("use") {
            let mut name = self.any_word()?;
            while self.eat_sym(".") {
                name.push('.');
                name.push_str(&self.any_word()?);
            }
            return Ok(Decl::Use(name));
        }
        if self.eat_kw("type") {
            let mut ts = vec![self.typedef()?];
            while self.eat_kw("with") {
                ts.push(self.typedef()?);
            }
            return Ok(Decl::Types(ts));
        }
        if self.eat_kw("predicate") || self.eat_kw("function") {
            let mut ls = vec![self.logicdef()?];
            while self.eat_kw("with") {
                ls.push(self.logicdef()?);
            }
            return Ok(Decl::Logic(ls));
        }
        if self.eat_kw("lemma") {
            let name = self.ident()?;
            self.sym(":")?;
            return Ok(Decl::Lemma(name, self.term()?));
        }
        if self.eat_kw("let") {
            let rec = self.eat_kw("rec");
            let mut funs = vec![self.fundef()?];
            while self.eat_kw("with") {
                funs.push(self.fundef()?);
            }
            return Ok(Decl::Funs { rec, funs });
        }
        self.err("expected a declaration")
    }

    fn any_word(&mut self) -> R<String> {
        match self.next() {
            Tok::Ident(w) | Tok::UIdent(w) => Ok(w),
            _ => {
                self.pos -= 1;
                self.err("expected name")
            }
        }
    }

    fn typedef(&mut self) -> R<TypeDef> {
        let name = self.ident()?;
        let mut params = Vec::new();
        while let Tok::TyVar(v) = self.peek().clone() {
            self.next();
            params.push(v);
        }
        self.sym("=")?;
        let body = if self.eat_sym("{") {
            let mut fs = Vec::new();
            loop {
                let f = self.ident()?;
                self.sym(":")?;
                fs.push((f, self.ty()?));
                if !self.eat_sym(";") {
                    break;
                }
            }
            self.sym("}")?;
            TypeBody::Record(fs)
        } else {
            let mut vs = Vec::new();
            while self.eat_sym("|") {
                let c = self.uident()?;
                let mut fields = Vec::new();
                while self.starts_ty_atom() {
                    fields.push(self.ty_atom()?);
                }
                vs.push((c, fields));
            }
            TypeBody::Variants(vs)
        };
        Ok(TypeDef { name, params, body })
    }

    fn param_list(&mut self) -> R<Vec<(String, Ty)>> {
        let mut ps = Vec::new();
        if matches!(self.peek(), Tok::Sym("(")) && matches!(self.peek_at(1), Tok::Sym(")")) {
            self.next();
            self.next();
            return Ok(ps);
        }
        while self.is_sym("(") {
            self.next();
            let x = self.ident()?;
            self.sym(":")?;
            let t = self.ty()?;
            self.sym(")")?;
            ps.push((x, t));
        }
        Ok(ps)
    }

    fn logicdef(&mut self) -> R<LogicDef> {
        let name = self.ident()?;
        let params = self.param_list()?;
        let ret = if self.eat_sym(":") { Some(self.ty()?) } else { None };
        let body = if self.eat_sym("=") { Some(self.term()?) } else { None };
        Ok(LogicDef { name, params, ret, body })
    }

    fn fundef(&mut self) -> R<FunDef> {
        let function = self.eat_kw("function");
        let name = self.ident()?;
        let params = self.param_list()?;
        self.sym(":")?;
        let ret = self.ty()?;
        let mut requires = Vec::new();
        let mut ensures = Vec::new();
        loop {
            let list = if self.eat_kw("requires") {
                &mut requires
            } else if self.eat_kw("ensures") {
                &mut ensures
            } else {
                break;
            };
            self.sym("{")?;
            list.push(self.term()?);
            self.sym("}")?;
        }
        self.sym("=")?;
        let body = self.seq()?;
        Ok(FunDef { function, name, params, ret, requires, ensures, body })
    }

    // ---- types ----

    fn starts_ty_atom(&self) -> bool {
        match self.peek() {
            Tok::Ident(w) => !KEYWORDS.contains(&w.as_str()),
            Tok::TyVar(_) | Tok::Sym("(") => true,
            _ => false,
        }
    }

    fn ty(&mut self) -> R<Ty> {
        let t = match self.peek().clone() {
            Tok::Ident(n) if !KEYWORDS.contains(&n.as_str()) => {
                self.next();
                let mut args = Vec::new();
                while self.starts_ty_atom() {
                    args.push(self.ty_atom()?);
                }
                base_ty(n, args)
            }
            _ => self.ty_atom()?,
        };
        if self.eat_sym("->") {
            return Ok(Ty::arrow(t, self.ty()?));
        }
        Ok(t)
    }

    fn ty_atom(&mut self) -> R<Ty> {
        match self.next() {
            Tok::Ident(n) => Ok(base_ty(n, vec![])),
            Tok::TyVar(v) => Ok(Ty::Param(v)),
            Tok::Sym("(") => {
                if self.eat_sym(")") {
                    return Ok(Ty::Unit);
                }
                let mut ts = vec![self.ty()?];
                while self.eat_sym(",") {
                    ts.push(self.ty()?);
                }
                self.sym(")")?;
                Ok(if ts.len() == 1 { ts.pop().expect("one") } else { Ty::Tuple(ts) })
            }
            _ => {
                self.pos -= 1;
                self.err("expected type")
            }
        }
    }

    // ---- terms ----

    fn seq(&mut self) -> R<Term> {
        let t = self.term()?;
        if self.eat_sym(";") {
            return Ok(Term::Seq(Box::new(t), Box::new(self.seq()?)));
        }
        Ok(t)
    }

    fn term(&mut self) -> R<Term> {
        if self.eat_kw("let") {
            let x = self.ident()?;
            self.sym("=")?;
            let v = self.term()?;
            self.kw("in")?;
            return Ok(Term::Let(x, Box::new(v), Box::new(self.seq()?)));
        }
        if self.eat_kw("forall") {
            let mut bs = Vec::new();
            loop {
                let x = self.ident()?;
                self.sym(":")?;
                bs.push((x, self.ty()?));
                if !self.eat_sym(",") {
                    break;
                }
            }
            self.sym(".")?;
            return Ok(Term::Forall(bs, Box::new(self.term()?)));
        }
        if self.eat_kw("if") {
            let c = self.term()?;
            self.kw("then")?;
            let a = self.atom()?;
            self.kw("else")?;
            let b = self.atom()?;
            return Ok(Term::If(Box::new(c), Box::new(a), Box::new(b)));
        }
        let lhs = self.or()?;
        if self.eat_sym("->") {
            return Ok(Term::Implies(Box::new(lhs), Box::new(self.term()?)));
        }
        Ok(lhs)
    }

    fn level(&mut self, ops: &[&'static str], next: fn(&mut Self) -> R<Term>) -> R<Term> {
        let mut lhs = next(self)?;
        'outer: loop {
            for op in ops {
                if self.eat_sym(op) {
                    let rhs = next(self)?;
                    lhs = Term::Bin(op.to_string(), Box::new(lhs), Box::new(rhs));
                    continue 'outer;
                }
            }
            return Ok(lhs);
        }
    }

    fn or(&mut self) -> R<Term> {
        self.level(&["\\/", "||"], Self::and)
    }

    fn and(&mut self) -> R<Term> {
        self.level(&["/\\", "&&"], Self::cmp)
    }

    fn cmp(&mut self) -> R<Term> {
        self.level(&["=", "<>", "<=", ">=", "<", ">"], Self::add)
    }

    fn add(&mut self) -> R<Term> {
        self.level(&["+", "-"], Self::mul)
    }

    fn mul(&mut self) -> R<Term> {
        self.level(&["*"], Self::unary)
    }

    fn unary(&mut self) -> R<Term> {
        if self.eat_sym("-") {
            if let Tok::Int(n) = *self.peek() {
                self.next();
                return Ok(Term::Int(-n));
            }
            return Ok(Term::Neg(Box::new(self.atom()?)));
        }
        if self.eat_kw("not") {
            return Ok(Term::Not(Box::new(self.atom()?)));
        }
        if self.is_kw("match") {
            return self.match_();
        }
        self.app()
    }

    fn match_(&mut self) -> R<Term> {
        self.kw("match")?;
        let s = self.term()?;
        self.kw("with")?;
        let mut arms = Vec::new();
        while self.eat_sym("|") {
            let p = self.pattern()?;
            self.sym("->")?;
            arms.push((p, self.seq()?));
        }
        self.kw("end")?;
        Ok(Term::Match(Box::new(s), arms))
    }

    fn starts_atom(&self) -> bool {
        match self.peek() {
            Tok::Ident(w) => !KEYWORDS.contains(&w.as_str()) || ["true", "false", "absurd"].contains(&w.as_str()),
            Tok::UIdent(_) | Tok::Int(_) | Tok::Sym("(") => true,
            _ => false,
        }
    }

    fn app(&mut self) -> R<Term> {
        let head = match self.peek().clone() {
            Tok::Ident(f) if !KEYWORDS.contains(&f.as_str()) => f,
            Tok::UIdent(c) => c,
            _ => return self.atom(),
        };
        self.next();
        let mut args = Vec::new();
        while self.starts_atom() {
            args.push(self.atom()?);
        }
        Ok(Term::app(&head, args))
    }

    fn atom(&mut self) -> R<Term> {
        match self.next() {
            Tok::Ident(w) if w == "true" => Ok(Term::Bool(true)),
            Tok::Ident(w) if w == "false" => Ok(Term::Bool(false)),
            Tok::Ident(w) if w == "absurd" => Ok(Term::Absurd),
            Tok::Ident(w) if !KEYWORDS.contains(&w.as_str()) => Ok(Term::Var(w)),
            Tok::UIdent(c) => Ok(Term::Var(c)),
            Tok::Int(n) => Ok(Term::Int(n)),
            Tok::Sym("(") => {
                if self.eat_sym(")") {
                    return Ok(Term::Unit);
                }
                let first = self.seq()?;
                if self.eat_sym(",") {
                    let mut ts = vec![first, self.seq()?];
                    while self.eat_sym(",") {
                        ts.push(self.seq()?);
                    }
                    self.sym(")")?;
                    return Ok(Term::Tuple(ts));
                }
                self.sym(")")?;
                Ok(first)
            }
            _ => {
                self.pos -= 1;
                self.err("expected term")
            }
        }
    }

    // ---- patterns ----

    fn pattern(&mut self) -> R<Pat> {
        if let Tok::UIdent(c) = self.peek().clone() {
            self.next();
            let mut args = Vec::new();
            while matches!(self.peek(), Tok::Ident(_) | Tok::UIdent(_) | Tok::Int(_) | Tok::Sym("(" | "_" | "-")) {
                args.push(self.pat_atom()?);
            }
            return Ok(Pat::Ctor(c, args));
        }
        self.pat_atom()
    }

    fn pat_atom(&mut self) -> R<Pat> {
        match self.next() {
            Tok::Sym("_") => Ok(Pat::Wildcard),
            Tok::Ident(x) => Ok(Pat::Var(x)),
            Tok::UIdent(c) => Ok(Pat::Ctor(c, vec![])),
            Tok::Int(n) => Ok(Pat::Int(n)),
            Tok::Sym("-") => match self.next() {
                Tok::Int(n) => Ok(Pat::Int(-n)),
                _ => self.err("expected integer"),
            },
            Tok::Sym("(") => {
                if self.eat_sym(")") {
                    return Ok(Pat::Tuple(vec![]));
                }
                let mut ps = vec![self.pattern()?];
                while self.eat_sym(",") {
                    ps.push(self.pattern()?);
                }
                self.sym(")")?;
                Ok(if ps.len() == 1 { ps.pop().expect("one") } else { Pat::Tuple(ps) })
            }
            _ => {
                self.pos -= 1;
                self.err("expected pattern")
            }
        }
    }
}

fn base_ty(n: String, args: Vec<Ty>) -> Ty {
    match (n.as_str(), args.is_empty()) {
        ("int", true) => Ty::Int,
        ("bool", true) => Ty::Bool,
        ("unit", true) => Ty::Unit,
        _ => Ty::Named(n, args),
    }
}

pub fn parse_whyml(src: &str) -> Result<Module, WhyParseError> {
    let mut p = P { toks: lex(src)?, pos: 0 };
    p.module()
}
