use crate::ast::*;

use super::lexer::{Tok, Token};
use super::ParseError;

type PResult<T> = Result<T, ParseError>;

/// Identifiers that open a specification clause and therefore end the
/// formula before them.
const CLAUSE_WORDS: &[&str] = &["requires", "ensures"];

/// Recursive-descent parser over a token stream produced by
/// [`super::tokenize`].
pub struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

enum Atom<T> {
    Plain(T),
    /// A parenthesized tuple `(a, b, ..)`, flattened when it is the argument
    /// of a constructor.
    ParenTuple(Vec<T>),
}

impl<T> Atom<T> {
    fn into_ctor_args(self) -> Vec<T> {
        match self {
            Atom::Plain(t) => vec![t],
            Atom::ParenTuple(ts) => ts,
        }
    }
}

impl Atom<Expr> {
    fn into_expr(self, loc: Loc) -> Expr {
        match self {
            Atom::Plain(e) => e,
            Atom::ParenTuple(es) => Expr::new(ExprKind::Tuple(es), loc),
        }
    }
}

impl Atom<Pattern> {
    fn into_pattern(self) -> Pattern {
        match self {
            Atom::Plain(p) => p,
            Atom::ParenTuple(ps) => Pattern::Tuple(ps),
        }
    }
}

impl Atom<Formula> {
    fn into_formula(self) -> Formula {
        match self {
            Atom::Plain(f) => f,
            Atom::ParenTuple(fs) => Formula::Tuple(fs),
        }
    }
}

impl Parser {
    pub fn new(toks: Vec<Token>) -> Self {
        Parser { toks, pos: 0 }
    }

    // ---- token helpers ----

    fn peek(&self) -> &Tok {
        self.peek_n(0)
    }

    fn peek_n(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn loc(&self) -> Loc {
        self.toks[self.pos.min(self.toks.len() - 1)].loc
    }

    fn advance(&mut self) -> Tok {
        let t = self.peek().clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Kw(x) if *x == k)
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == w)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, k: &str) -> bool {
        if self.is_kw(k) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn unexpected<T>(&self, expected: &[&str]) -> PResult<T> {
        Err(ParseError::unexpected(self.loc(), expected, self.peek()))
    }

    fn fail<T>(&self, msg: impl Into<String>) -> PResult<T> {
        Err(ParseError::custom(self.loc(), self.peek(), msg))
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.unexpected(&[&format!("`{s}`")])
        }
    }

    fn expect_kw(&mut self, k: &str) -> PResult<()> {
        if self.eat_kw(k) {
            Ok(())
        } else {
            self.unexpected(&[&format!("`{k}`")])
        }
    }

    fn expect_tok(&mut self, t: Tok) -> PResult<()> {
        if *self.peek() == t {
            self.advance();
            Ok(())
        } else {
            self.unexpected(&[&t.to_string()])
        }
    }

    pub fn expect_eof(&mut self) -> PResult<()> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            self.unexpected(&["end of input"])
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.advance();
                Ok(s)
            }
            _ => self.unexpected(&["identifier"]),
        }
    }

    fn uident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::UIdent(s) => {
                self.advance();
                Ok(s)
            }
            _ => self.unexpected(&["constructor name"]),
        }
    }

    // ---- program structure ----

    pub fn program(&mut self) -> PResult<Program> {
        let mut prog = Program::default();
        loop {
            match self.peek().clone() {
                Tok::Eof => break,
                Tok::Sym(";;") => {
                    self.advance();
                }
                Tok::Kw("type") => {
                    let d = self.type_decl()?;
                    prog.items.push(TopLevel::TypeDecl(d));
                }
                Tok::Kw("let") => {
                    let loc = self.loc();
                    self.advance();
                    let mut def = self.let_def(loc)?;
                    if self.eat_kw("in") {
                        let body = self.expr()?;
                        let e = Expr::new(ExprKind::LetIn(Box::new(def), Box::new(body)), loc);
                        prog.items.push(TopLevel::Expr(e));
                        continue;
                    }
                    while *self.peek() == Tok::SpecOpen && !self.at_logic_block() {
                        if def.spec.is_some() {
                            return self.fail(format!(
                                "definition `{}` already has a specification",
                                def.name
                            ));
                        }
                        self.advance();
                        def.spec = Some(self.spec_body(Tok::SpecClose)?);
                    }
                    prog.items.push(TopLevel::LetDef(def));
                }
                Tok::SpecOpen => {
                    if !self.at_logic_block() {
                        return self.fail("a specification block must follow a definition");
                    }
                    self.advance();
                    self.logic_block(&mut prog)?;
                }
                _ => {
                    let e = self.expr()?;
                    prog.items.push(TopLevel::Expr(e));
                }
            }
        }
        Ok(prog)
    }

    fn at_logic_block(&self) -> bool {
        *self.peek() == Tok::SpecOpen
            && matches!(self.peek_n(1), Tok::Ident(w) if ["function", "predicate", "lemma"].contains(&w.as_str()))
    }

    fn logic_block(&mut self, prog: &mut Program) -> PResult<()> {
        let loc = self.loc();
        let word = self.ident()?;
        if word == "lemma" {
            let name = self.ident()?;
            self.expect_sym(":")?;
            let formula = self.formula()?;
            self.expect_tok(Tok::SpecClose)?;
            prog.items.push(TopLevel::Lemma(LemmaDecl { name, formula, loc }));
            return Ok(());
        }
        let predicate = word == "predicate";
        self.eat_kw("rec");
        let name = self.ident()?;
        let mut params = Vec::new();
        while self.eat_sym("(") {
            let pname = self.ident()?;
            self.expect_sym(":")?;
            let t = self.ty()?;
            self.expect_sym(")")?;
            params.push((pname, t));
        }
        let ret = if predicate {
            Ty::Bool
        } else {
            self.expect_sym(":")?;
            self.ty()?
        };
        let body = if self.eat_sym("=") { Some(self.formula()?) } else { None };
        self.expect_tok(Tok::SpecClose)?;
        prog.prelude.push(LogicDecl { name, params, ret, predicate, body, loc });
        Ok(())
    }

    fn type_decl(&mut self) -> PResult<TypeDecl> {
        let loc = self.loc();
        self.expect_kw("type")?;
        let mut params = Vec::new();
        match self.peek().clone() {
            Tok::TyVar(v) => {
                self.advance();
                params.push(v);
            }
            Tok::Sym("(") if matches!(self.peek_n(1), Tok::TyVar(_)) => {
                self.advance();
                loop {
                    match self.advance() {
                        Tok::TyVar(v) => params.push(v),
                        _ => return self.unexpected(&["type variable"]),
                    }
                    if !self.eat_sym(",") {
                        break;
                    }
                }
                self.expect_sym(")")?;
            }
            _ => {}
        }
        let name = self.ident()?;
        self.expect_sym("=")?;
        let body = if self.is_sym("|") || matches!(self.peek(), Tok::UIdent(_)) {
            let mut variants = Vec::new();
            self.eat_sym("|");
            loop {
                let cname = self.uident()?;
                let mut fields = Vec::new();
                if self.eat_kw("of") {
                    fields.push(self.ty_app()?);
                    while self.eat_sym("*") {
                        fields.push(self.ty_app()?);
                    }
                }
                variants.push(Variant { name: cname, fields });
                if !self.eat_sym("|") {
                    break;
                }
            }
            TypeBody::Variants(variants)
        } else if self.eat_sym("{") {
            let mut fields = Vec::new();
            while !self.is_sym("}") {
                let f = self.ident()?;
                self.expect_sym(":")?;
                fields.push((f, self.ty()?));
                if !self.eat_sym(";") {
                    break;
                }
            }
            self.expect_sym("}")?;
            TypeBody::Record(fields)
        } else {
            TypeBody::Alias(self.ty()?)
        };
        Ok(TypeDecl { name, params, body, loc })
    }

    /// Parses `rec? name params (: ty)? = body` after the `let` keyword.
    fn let_def(&mut self, loc: Loc) -> PResult<LetDef> {
        let is_rec = self.eat_kw("rec");
        let name = self.ident()?;
        let params = self.params()?;
        let ret = if self.eat_sym(":") { Some(self.ty()?) } else { None };
        self.expect_sym("=")?;
        let body = self.expr()?;
        Ok(LetDef { is_rec, name, params, ret, body, spec: None, loc })
    }

    fn params(&mut self) -> PResult<Vec<Param>> {
        let mut params = Vec::new();
        loop {
            match self.peek().clone() {
                Tok::Ident(n) => {
                    self.advance();
                    params.push(Param { name: n, ty: None });
                }
                Tok::Sym("(") if matches!(self.peek_n(1), Tok::Ident(_)) => {
                    self.advance();
                    let n = self.ident()?;
                    let ty = if self.eat_sym(":") { Some(self.ty()?) } else { None };
                    self.expect_sym(")")?;
                    params.push(Param { name: n, ty });
                }
                _ => return Ok(params),
            }
        }
    }

    /// Spec clauses up to (and including) `close`.
    fn spec_body(&mut self, close: Tok) -> PResult<Spec> {
        let loc = self.loc();
        let mut spec = Spec { loc, ..Spec::default() };
        if !CLAUSE_WORDS.iter().any(|w| self.is_word(w)) && *self.peek() != close {
            spec.result_names.push(self.ident()?);
            while self.eat_sym(",") {
                spec.result_names.push(self.ident()?);
            }
            self.expect_sym("=")?;
            spec.fn_name = Some(self.ident()?);
            loop {
                match self.peek().clone() {
                    Tok::Ident(a) if !CLAUSE_WORDS.contains(&a.as_str()) => {
                        self.advance();
                        spec.arg_names.push(a);
                    }
                    Tok::Sym("_") => {
                        self.advance();
                        spec.arg_names.push("_".into());
                    }
                    _ => break,
                }
            }
        }
        loop {
            if self.is_word("requires") {
                self.advance();
                spec.requires.push(self.formula()?);
            } else if self.is_word("ensures") {
                self.advance();
                spec.ensures.push(self.formula()?);
            } else if *self.peek() == close {
                self.advance();
                return Ok(spec);
            } else {
                return self.unexpected(&["`requires`", "`ensures`", &close.to_string()]);
            }
        }
    }

    // ---- types ----

    pub fn ty(&mut self) -> PResult<Ty> {
        let lhs = self.ty_tuple()?;
        if self.eat_sym("->") {
            Ok(Ty::arrow(lhs, self.ty()?))
        } else {
            Ok(lhs)
        }
    }

    fn ty_tuple(&mut self) -> PResult<Ty> {
        let first = self.ty_app()?;
        if !self.is_sym("*") {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat_sym("*") {
            items.push(self.ty_app()?);
        }
        Ok(Ty::Tuple(items))
    }

    fn ty_app(&mut self) -> PResult<Ty> {
        let mut args: Vec<Ty> = match self.peek().clone() {
            Tok::Sym("(") => {
                self.advance();
                let first = self.ty()?;
                let mut items = vec![first];
                while self.eat_sym(",") {
                    items.push(self.ty()?);
                }
                self.expect_sym(")")?;
                if items.len() > 1 && !matches!(self.peek(), Tok::Ident(_)) {
                    return self.unexpected(&["type constructor"]);
                }
                items
            }
            Tok::TyVar(v) => {
                self.advance();
                vec![Ty::Param(v)]
            }
            Tok::Ident(n) => {
                self.advance();
                vec![base_ty(&n, vec![])]
            }
            _ => return self.unexpected(&["type"]),
        };
        while let Tok::Ident(n) = self.peek().clone() {
            self.advance();
            args = vec![base_ty(&n, args)];
        }
        if args.len() != 1 {
            return self.unexpected(&["type constructor"]);
        }
        Ok(args.pop().expect("one"))
    }

    // ---- expressions ----

    pub fn expr(&mut self) -> PResult<Expr> {
        let loc = self.loc();
        let e = self.expr_noseq()?;
        if self.eat_sym(";") {
            let rest = self.expr()?;
            return Ok(Expr::new(ExprKind::Seq(Box::new(e), Box::new(rest)), loc));
        }
        Ok(e)
    }

    fn expr_noseq(&mut self) -> PResult<Expr> {
        let loc = self.loc();
        let first = self.or_expr()?;
        if !self.is_sym(",") {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat_sym(",") {
            items.push(self.or_expr()?);
        }
        Ok(Expr::new(ExprKind::Tuple(items), loc))
    }

    fn binop_chain(
        &mut self,
        ops: &[(&str, BinOp)],
        next: fn(&mut Self) -> PResult<Expr>,
    ) -> PResult<Expr> {
        let mut lhs = next(self)?;
        'outer: loop {
            for (sym, op) in ops {
                if self.is_sym(sym) {
                    let loc = self.loc();
                    self.advance();
                    let rhs = next(self)?;
                    lhs = Expr::new(ExprKind::BinOp(*op, Box::new(lhs), Box::new(rhs)), loc);
                    continue 'outer;
                }
            }
            return Ok(lhs);
        }
    }

    fn or_expr(&mut self) -> PResult<Expr> {
        self.binop_chain(&[("||", BinOp::Or)], Self::and_expr)
    }

    fn and_expr(&mut self) -> PResult<Expr> {
        self.binop_chain(&[("&&", BinOp::And)], Self::cmp_expr)
    }

    fn cmp_expr(&mut self) -> PResult<Expr> {
        self.binop_chain(
            &[
                ("=", BinOp::Eq),
                ("<>", BinOp::Ne),
                ("<=", BinOp::Le),
                (">=", BinOp::Ge),
                ("<", BinOp::Lt),
                (">", BinOp::Gt),
            ],
            Self::cons_expr,
        )
    }

    fn cons_expr(&mut self) -> PResult<Expr> {
        let loc = self.loc();
        let head = self.add_expr()?;
        if self.eat_sym("::") {
            let tail = self.cons_expr()?;
            return Ok(Expr::new(ExprKind::Cons(Box::new(head), Box::new(tail)), loc));
        }
        Ok(head)
    }

    fn add_expr(&mut self) -> PResult<Expr> {
        self.binop_chain(&[("+", BinOp::Add), ("-", BinOp::Sub)], Self::mul_expr)
    }

    fn mul_expr(&mut self) -> PResult<Expr> {
        self.binop_chain(&[("*", BinOp::Mul), ("/", BinOp::Div)], Self::unary_expr)
    }

    fn unary_expr(&mut self) -> PResult<Expr> {
        let loc = self.loc();
        match self.peek() {
            Tok::Sym("-") => {
                self.advance();
                let e = self.unary_expr()?;
                Ok(match e.kind {
                    ExprKind::Int(n) => Expr::new(ExprKind::Int(-n), loc),
                    _ => Expr::new(ExprKind::UnOp(UnOp::Neg, Box::new(e)), loc),
                })
            }
            Tok::Kw("not") => {
                self.advance();
                let e = self.app_expr()?;
                Ok(Expr::new(ExprKind::UnOp(UnOp::Not, Box::new(e)), loc))
            }
            Tok::Kw("let") | Tok::Kw("match") | Tok::Kw("fun") | Tok::Kw("if") => self.prefix_expr(),
            _ => self.app_expr(),
        }
    }

    /// `let`, `match`, `fun` and `if`, all of which extend as far right as
    /// possible.
    fn prefix_expr(&mut self) -> PResult<Expr> {
        let loc = self.loc();
        match self.advance() {
            Tok::Kw("let") => {
                let def = self.let_def(loc)?;
                self.expect_kw("in")?;
                let body = self.expr()?;
                Ok(Expr::new(ExprKind::LetIn(Box::new(def), Box::new(body)), loc))
            }
            Tok::Kw("match") => {
                let scrut = self.expr()?;
                self.expect_kw("with")?;
                self.eat_sym("|");
                let mut arms = Vec::new();
                loop {
                    let p = self.pattern()?;
                    self.expect_sym("->")?;
                    let body = self.expr()?;
                    arms.push((p, body));
                    if !self.eat_sym("|") {
                        break;
                    }
                }
                self.eat_kw("end");
                Ok(Expr::new(ExprKind::Match(Box::new(scrut), arms), loc))
            }
            Tok::Kw("fun") => {
                let spec = if *self.peek() == Tok::AttrOpen {
                    self.advance();
                    Some(self.spec_body(Tok::AttrClose)?)
                } else {
                    None
                };
                let params = self.params()?;
                if params.is_empty() {
                    return self.unexpected(&["parameter"]);
                }
                let ret = if self.eat_sym(":") { Some(self.ty_tuple()?) } else { None };
                self.expect_sym("->")?;
                let body = self.expr()?;
                Ok(Expr::new(
                    ExprKind::Lambda(Lambda { spec, params, ret, body: Box::new(body) }),
                    loc,
                ))
            }
            Tok::Kw("if") => {
                let c = self.expr()?;
                self.expect_kw("then")?;
                let a = self.or_expr()?;
                let b = if self.eat_kw("else") {
                    self.or_expr()?
                } else {
                    Expr::new(ExprKind::Unit, self.loc())
                };
                Ok(Expr::new(ExprKind::If(Box::new(c), Box::new(a), Box::new(b)), loc))
            }
            _ => unreachable!("prefix_expr called on a non-prefix token"),
        }
    }

    fn starts_atom(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Ident(_)
                | Tok::UIdent(_)
                | Tok::Int(_)
                | Tok::Kw("true")
                | Tok::Kw("false")
                | Tok::Sym("(")
                | Tok::Sym("[")
        )
    }

    fn app_expr(&mut self) -> PResult<Expr> {
        let loc = self.loc();
        let mut head = if let Tok::UIdent(c) = self.peek().clone() {
            self.advance();
            let args = if self.starts_atom() {
                let aloc = self.loc();
                match self.atom_expr()? {
                    Atom::ParenTuple(es) => es,
                    a => vec![a.into_expr(aloc)],
                }
            } else {
                vec![]
            };
            Expr::new(ExprKind::Ctor(c, args), loc)
        } else {
            let aloc = self.loc();
            self.atom_expr()?.into_expr(aloc)
        };
        while self.starts_atom() {
            let aloc = self.loc();
            let arg = self.atom_expr()?.into_expr(aloc);
            head = Expr::new(ExprKind::App(Box::new(head), Box::new(arg)), loc);
        }
        Ok(head)
    }

    fn atom_expr(&mut self) -> PResult<Atom<Expr>> {
        let loc = self.loc();
        let e = match self.advance() {
            Tok::Ident(n) => ExprKind::Var(n),
            Tok::UIdent(c) => ExprKind::Ctor(c, vec![]),
            Tok::Int(n) => ExprKind::Int(n),
            Tok::Kw("true") => ExprKind::Bool(true),
            Tok::Kw("false") => ExprKind::Bool(false),
            Tok::Sym("(") => {
                if self.eat_sym(")") {
                    ExprKind::Unit
                } else {
                    let e = self.expr()?;
                    self.expect_sym(")")?;
                    return Ok(match e.kind {
                        ExprKind::Tuple(es) => Atom::ParenTuple(es),
                        _ => Atom::Plain(e),
                    });
                }
            }
            Tok::Sym("[") => {
                let mut items = Vec::new();
                while !self.is_sym("]") {
                    items.push(self.expr_noseq()?);
                    if !self.eat_sym(";") {
                        break;
                    }
                }
                self.expect_sym("]")?;
                let mut list = Expr::new(ExprKind::Nil, loc);
                for it in items.into_iter().rev() {
                    let l = it.loc;
                    list = Expr::new(ExprKind::Cons(Box::new(it), Box::new(list)), l);
                }
                return Ok(Atom::Plain(list));
            }
            _ => {
                self.pos -= 1;
                return self.unexpected(&["expression"]);
            }
        };
        Ok(Atom::Plain(Expr::new(e, loc)))
    }

    // ---- patterns ----

    pub fn pattern(&mut self) -> PResult<Pattern> {
        let first = self.pat_cons()?;
        if !self.is_sym(",") {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat_sym(",") {
            items.push(self.pat_cons()?);
        }
        Ok(Pattern::Tuple(items))
    }

    fn pat_cons(&mut self) -> PResult<Pattern> {
        let head = self.pat_app()?;
        if self.eat_sym("::") {
            return Ok(Pattern::Cons(Box::new(head), Box::new(self.pat_cons()?)));
        }
        Ok(head)
    }

    fn starts_pat_atom(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Ident(_) | Tok::UIdent(_) | Tok::Int(_) | Tok::Sym("(") | Tok::Sym("[") | Tok::Sym("_")
        )
    }

    fn pat_app(&mut self) -> PResult<Pattern> {
        if let Tok::UIdent(c) = self.peek().clone() {
            self.advance();
            // `C (a, b)` and the curried logic form `C a b` are both accepted.
            let mut args = Vec::new();
            if self.starts_pat_atom() {
                args = self.pat_atom()?.into_ctor_args();
                while self.starts_pat_atom() {
                    args.push(self.pat_atom()?.into_pattern());
                }
            }
            return Ok(Pattern::Ctor(c, args));
        }
        Ok(self.pat_atom()?.into_pattern())
    }

    fn pat_atom(&mut self) -> PResult<Atom<Pattern>> {
        let p = match self.advance() {
            Tok::Sym("_") => Pattern::Wildcard,
            Tok::Ident(n) => Pattern::Var(n, None),
            Tok::UIdent(c) => Pattern::Ctor(c, vec![]),
            Tok::Int(n) => Pattern::Int(n),
            Tok::Sym("-") => match self.advance() {
                Tok::Int(n) => Pattern::Int(-n),
                _ => {
                    self.pos -= 1;
                    return self.unexpected(&["integer"]);
                }
            },
            Tok::Sym("[") => {
                let mut items = Vec::new();
                while !self.is_sym("]") {
                    items.push(self.pat_cons()?);
                    if !self.eat_sym(";") {
                        break;
                    }
                }
                self.expect_sym("]")?;
                items
                    .into_iter()
                    .rev()
                    .fold(Pattern::Nil, |acc, p| Pattern::Cons(Box::new(p), Box::new(acc)))
            }
            Tok::Sym("(") => {
                if self.eat_sym(")") {
                    Pattern::Tuple(vec![])
                } else {
                    let p = self.pattern()?;
                    if self.eat_sym(":") {
                        let t = self.ty()?;
                        self.expect_sym(")")?;
                        return Ok(Atom::Plain(match p {
                            Pattern::Var(n, _) => Pattern::Var(n, Some(t)),
                            Pattern::Wildcard => Pattern::Wildcard,
                            _ => return self.fail("type ascriptions in patterns apply to variables only"),
                        }));
                    }
                    self.expect_sym(")")?;
                    return Ok(match p {
                        Pattern::Tuple(ps) if !ps.is_empty() => Atom::ParenTuple(ps),
                        p => Atom::Plain(p),
                    });
                }
            }
            _ => {
                self.pos -= 1;
                return self.unexpected(&["pattern"]);
            }
        };
        Ok(Atom::Plain(p))
    }

    // ---- formulas ----

    pub fn formula(&mut self) -> PResult<Formula> {
        let lhs = self.f_or()?;
        if self.eat_sym("->") {
            return Ok(Formula::implies(lhs, self.formula()?));
        }
        Ok(lhs)
    }

    fn f_or(&mut self) -> PResult<Formula> {
        let mut lhs = self.f_and()?;
        while self.eat_sym("\\/") || self.eat_sym("||") {
            lhs = Formula::bin(BinOp::Or, lhs, self.f_and()?);
        }
        Ok(lhs)
    }

    fn f_and(&mut self) -> PResult<Formula> {
        let mut lhs = self.f_not()?;
        while self.eat_sym("/\\") || self.eat_sym("&&") {
            lhs = Formula::bin(BinOp::And, lhs, self.f_not()?);
        }
        Ok(lhs)
    }

    fn f_not(&mut self) -> PResult<Formula> {
        if self.eat_kw("not") {
            return Ok(Formula::negate(self.f_not()?));
        }
        if self.is_word("forall") {
            self.advance();
            let binders = self.binders()?;
            self.expect_sym(".")?;
            return Ok(Formula::Forall(binders, Box::new(self.formula()?)));
        }
        if self.eat_kw("let") {
            let x = self.ident()?;
            self.expect_sym("=")?;
            let t = self.formula()?;
            self.expect_kw("in")?;
            return Ok(Formula::Let(x, Box::new(t), Box::new(self.formula()?)));
        }
        if self.is_kw("match") {
            return self.f_match();
        }
        self.f_cmp()
    }

    fn f_match(&mut self) -> PResult<Formula> {
        self.expect_kw("match")?;
        let s = self.formula()?;
        self.expect_kw("with")?;
        self.eat_sym("|");
        let mut arms = Vec::new();
        loop {
            let p = self.pattern()?;
            self.expect_sym("->")?;
            arms.push((p, self.formula()?));
            if !self.eat_sym("|") {
                break;
            }
        }
        self.expect_kw("end")?;
        Ok(Formula::Match(Box::new(s), arms))
    }

    fn binders(&mut self) -> PResult<Vec<Binder>> {
        let mut out = Vec::new();
        loop {
            if self.eat_sym("(") {
                let mut names = vec![self.ident()?];
                while let Tok::Ident(n) = self.peek().clone() {
                    self.advance();
                    names.push(n);
                }
                self.expect_sym(":")?;
                let t = self.ty()?;
                self.expect_sym(")")?;
                out.extend(names.into_iter().map(|name| Binder { name, ty: Some(t.clone()) }));
                if !self.is_sym("(") && !matches!(self.peek(), Tok::Ident(_)) && !self.eat_sym(",") {
                    return Ok(out);
                }
                continue;
            }
            let mut names = vec![self.ident()?];
            while let Tok::Ident(n) = self.peek().clone() {
                self.advance();
                names.push(n);
            }
            let ty = if self.eat_sym(":") { Some(self.ty()?) } else { None };
            out.extend(names.into_iter().map(|name| Binder { name, ty: ty.clone() }));
            if !self.eat_sym(",") {
                return Ok(out);
            }
        }
    }

    fn f_cmp(&mut self) -> PResult<Formula> {
        let lhs = self.f_cons()?;
        for (sym, op) in [
            ("=", BinOp::Eq),
            ("<>", BinOp::Ne),
            ("<=", BinOp::Le),
            (">=", BinOp::Ge),
            ("<", BinOp::Lt),
            (">", BinOp::Gt),
        ] {
            if self.eat_sym(sym) {
                return Ok(Formula::bin(op, lhs, self.f_cons()?));
            }
        }
        Ok(lhs)
    }

    fn f_cons(&mut self) -> PResult<Formula> {
        let head = self.f_add()?;
        if self.eat_sym("::") {
            return Ok(Formula::Ctor("Cons".into(), vec![head, self.f_cons()?]));
        }
        Ok(head)
    }

    fn f_add(&mut self) -> PResult<Formula> {
        let mut lhs = self.f_mul()?;
        loop {
            if self.eat_sym("+") {
                lhs = Formula::bin(BinOp::Add, lhs, self.f_mul()?);
            } else if self.eat_sym("-") {
                lhs = Formula::bin(BinOp::Sub, lhs, self.f_mul()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn f_mul(&mut self) -> PResult<Formula> {
        let mut lhs = self.f_unary()?;
        loop {
            if self.eat_sym("*") {
                lhs = Formula::bin(BinOp::Mul, lhs, self.f_unary()?);
            } else if self.eat_sym("/") {
                lhs = Formula::bin(BinOp::Div, lhs, self.f_unary()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn f_unary(&mut self) -> PResult<Formula> {
        if self.eat_sym("-") {
            return Ok(match self.f_unary()? {
                Formula::Int(n) => Formula::Int(-n),
                f => Formula::Un(UnOp::Neg, Box::new(f)),
            });
        }
        self.f_app()
    }

    fn starts_f_atom(&self) -> bool {
        match self.peek() {
            Tok::Ident(w) => !CLAUSE_WORDS.contains(&w.as_str()) && w != "forall",
            Tok::UIdent(_) | Tok::Int(_) | Tok::Kw("true") | Tok::Kw("false") => true,
            Tok::Sym("(") | Tok::Sym("[") => true,
            _ => false,
        }
    }

    fn f_app(&mut self) -> PResult<Formula> {
        match self.peek().clone() {
            Tok::Ident(name) if name == "post" && self.starts_f_atom_at(1) => {
                self.advance();
                self.f_post()
            }
            Tok::Ident(name) if self.starts_f_atom_at(1) => {
                self.advance();
                let mut args = Vec::new();
                while self.starts_f_atom() {
                    args.push(self.f_atom_plain()?);
                }
                Ok(Formula::App(name, args))
            }
            Tok::UIdent(c) => {
                self.advance();
                let mut args = Vec::new();
                let mut first = true;
                while self.starts_f_atom() {
                    let a = self.f_atom()?;
                    match a {
                        Atom::ParenTuple(fs) if first && !self.starts_f_atom() => args.extend(fs),
                        Atom::Plain(f) => args.push(f),
                        Atom::ParenTuple(fs) => args.push(Formula::Tuple(fs)),
                    }
                    first = false;
                }
                Ok(Formula::Ctor(c, args))
            }
            _ => self.f_atom_plain(),
        }
    }

    fn starts_f_atom_at(&self, n: usize) -> bool {
        match self.peek_n(n) {
            Tok::Ident(w) => !CLAUSE_WORDS.contains(&w.as_str()) && w != "forall",
            Tok::UIdent(_) | Tok::Int(_) | Tok::Kw("true") | Tok::Kw("false") => true,
            Tok::Sym("(") | Tok::Sym("[") => true,
            _ => false,
        }
    }

    fn f_post(&mut self) -> PResult<Formula> {
        if !self.is_sym("(") {
            return self.fail("`post` needs its function argument written as `(f : type)`");
        }
        self.advance();
        let func = self.formula()?;
        if !self.eat_sym(":") {
            return self.fail("`post` needs its function argument written as `(f : type)`");
        }
        let fn_ty = self.ty()?;
        self.expect_sym(")")?;
        let mut rest = Vec::new();
        while self.starts_f_atom() {
            rest.push(self.f_atom_plain()?);
        }
        if rest.len() < 2 {
            return self.fail("`post` needs at least one argument and a result");
        }
        let result = rest.pop().expect("len >= 2");
        Ok(Formula::PostMeta { func: Box::new(func), fn_ty, args: rest, result: Box::new(result) })
    }

    fn f_atom_plain(&mut self) -> PResult<Formula> {
        Ok(self.f_atom()?.into_formula())
    }

    fn f_atom(&mut self) -> PResult<Atom<Formula>> {
        let f = match self.advance() {
            Tok::Ident(n) => Formula::Var(n),
            Tok::UIdent(c) => Formula::Ctor(c, vec![]),
            Tok::Int(n) => Formula::Int(n),
            Tok::Kw("true") => Formula::True,
            Tok::Kw("false") => Formula::False,
            Tok::Sym("[") => {
                let mut items = Vec::new();
                while !self.is_sym("]") {
                    items.push(self.f_or()?);
                    if !self.eat_sym(";") {
                        break;
                    }
                }
                self.expect_sym("]")?;
                items.into_iter().rev().fold(Formula::Ctor("Nil".into(), vec![]), |acc, x| {
                    Formula::Ctor("Cons".into(), vec![x, acc])
                })
            }
            Tok::Sym("(") => {
                if self.eat_sym(")") {
                    Formula::Unit
                } else {
                    let first = self.formula()?;
                    if self.is_sym(":") {
                        return self.fail("type ascriptions are only allowed on the function argument of `post`");
                    }
                    if self.is_sym(",") {
                        let mut items = vec![first];
                        while self.eat_sym(",") {
                            items.push(self.formula()?);
                        }
                        self.expect_sym(")")?;
                        return Ok(Atom::ParenTuple(items));
                    }
                    self.expect_sym(")")?;
                    first
                }
            }
            _ => {
                self.pos -= 1;
                return self.unexpected(&["term"]);
            }
        };
        Ok(Atom::Plain(f))
    }
}

fn base_ty(name: &str, args: Vec<Ty>) -> Ty {
    match (name, args.is_empty()) {
        ("int" | "integer", true) => Ty::Int,
        ("bool", true) => Ty::Bool,
        ("unit", true) => Ty::Unit,
        _ => Ty::Named(name.to_string(), args),
    }
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use crate::ast::*;

    #[test]
    fn annotated_identity() {
        let p = parse_program("let id (x:int):int = x (*@ r = id x ensures r = x *)").unwrap();
        let d = p.def("id").unwrap();
        let s = d.spec.as_ref().unwrap();
        assert_eq!(s.result_names, vec!["r"]);
        assert_eq!(s.ensures, vec![Formula::eq(Formula::var("r"), Formula::var("x"))]);
    }

    #[test]
    fn post_meta() {
        let f = parse_formula("post (k : int -> int) (length l) result").unwrap();
        assert_eq!(
            f,
            Formula::PostMeta {
                func: Box::new(Formula::var("k")),
                fn_ty: Ty::arrow(Ty::Int, Ty::Int),
                args: vec![Formula::app("length", vec![Formula::var("l")])],
                result: Box::new(Formula::var("result")),
            }
        );
    }

    #[test]
    fn post_without_ascription_fails() {
        assert!(parse_formula("post k x r").is_err());
    }

    #[test]
    fn true_formula() {
        assert_eq!(parse_formula("true").unwrap(), Formula::True);
    }

    #[test]
    fn forall_extends_right() {
        let f = parse_formula("forall j. 0 <= j -> j + 1 > 0").unwrap();
        let Formula::Forall(bs, body) = f else { panic!() };
        assert_eq!(bs, vec![Binder { name: "j".into(), ty: None }]);
        assert!(matches!(*body, Formula::Implies(..)));
    }

    #[test]
    fn precedence_not_and_or_implies() {
        let f = parse_formula("not a /\\ b \\/ c -> d -> e").unwrap();
        let expected = Formula::implies(
            Formula::bin(
                BinOp::Or,
                Formula::and(Formula::negate(Formula::var("a")), Formula::var("b")),
                Formula::var("c"),
            ),
            Formula::implies(Formula::var("d"), Formula::var("e")),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn lambda_attribute() {
        let e = parse_expr("fun [@gospel {| ensures result = x |}] (x : int) : int -> x").unwrap();
        let ExprKind::Lambda(l) = e.kind else { panic!() };
        assert_eq!(l.spec.unwrap().ensures.len(), 1);
        assert_eq!(l.ret, Some(Ty::Int));
    }

    #[test]
    fn spec_must_follow_definition() {
        assert!(parse_program("3;; (*@ ensures true *)").is_err());
    }

    #[test]
    fn ctor_tuple_argument_is_flattened() {
        let e = parse_expr("Node (Empty, 1, Empty)").unwrap();
        let ExprKind::Ctor(c, args) = e.kind else { panic!() };
        assert_eq!(c, "Node");
        assert_eq!(args.len(), 3);
    }

    #[test]
    fn curried_ctor_in_formula() {
        let f = parse_formula("Sub (Const v) x").unwrap();
        assert_eq!(
            f,
            Formula::Ctor(
                "Sub".into(),
                vec![Formula::Ctor("Const".into(), vec![Formula::var("v")]), Formula::var("x")]
            )
        );
    }

    #[test]
    fn application_is_left_nested() {
        let e = parse_expr("(k 3) 4").unwrap();
        let ExprKind::App(f, a) = e.kind else { panic!() };
        assert_eq!(a.kind, ExprKind::Int(4));
        assert!(matches!(f.kind, ExprKind::App(..)));
    }

    #[test]
    fn list_literal() {
        let e = parse_expr("[1; 2]").unwrap();
        let ExprKind::Cons(h, _) = e.kind else { panic!() };
        assert_eq!(h.kind, ExprKind::Int(1));
    }

    #[test]
    fn types() {
        assert_eq!(parse_type("int list -> (int -> int) -> int").unwrap().to_string(), "int list -> (int -> int) -> int");
        assert_eq!(parse_type("integer").unwrap(), Ty::Int);
        assert_eq!(
            parse_type("(exp -> exp) * exp").unwrap(),
            Ty::Tuple(vec![Ty::arrow(Ty::named("exp"), Ty::named("exp")), Ty::named("exp")])
        );
    }

    #[test]
    fn tuple_result_header() {
        let p = parse_program(
            "let f (e : int) : int * int = (e, e)\n(*@ a, b = f e\n ensures a = b && forall r. r = r *)",
        )
        .unwrap();
        let s = p.def("f").unwrap().spec.clone().unwrap();
        assert_eq!(s.result_names, vec!["a", "b"]);
        let Formula::Bin(BinOp::And, _, rhs) = &s.ensures[0] else { panic!() };
        assert!(matches!(**rhs, Formula::Forall(..)));
    }

    #[test]
    fn logic_blocks() {
        let p = parse_program(
            "type exp = Const of int | Sub of exp * exp\n\
             (*@ function eval (e : exp) : int = match e with | Const n -> n | Sub a b -> eval a - eval b end *)\n\
             (*@ predicate is_value (e : exp) = match e with Const _ -> true | _ -> false end *)\n\
             (*@ lemma triv : forall x: int. x = x *)",
        )
        .unwrap();
        assert_eq!(p.prelude.len(), 2);
        assert!(p.prelude[1].predicate);
        assert_eq!(p.lemmas().count(), 1);
    }

    #[test]
    fn located_error() {
        let e = parse_program("let f (x : int) : int =\n  x +").unwrap_err();
        assert_eq!(e.loc.line, 2);
    }
}
