//! Surface syntax shared by every pass: types, expressions, patterns,
//! specification formulas and top-level items.
//!
//! Expressions carry a source location and, once the type checker has run,
//! their resolved type. Structural equality on [`Expr`] ignores both, so a
//! program compares equal to itself after a print/parse round trip.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

/// A position in the source text (1-based line and column).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Loc {
    pub line: u32,
    pub col: u32,
}

impl Loc {
    pub fn new(line: u32, col: u32) -> Self {
        Loc { line, col }
    }
}

impl fmt::Display for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ty {
    Unit,
    Int,
    Bool,
    Named(String, Vec<Ty>),
    /// Always unary; `a -> b -> c` is `Arrow(a, Arrow(b, c))`.
    Arrow(Box<Ty>, Box<Ty>),
    Tuple(Vec<Ty>),
    /// A type parameter of a type declaration (`'a`). Never survives into
    /// the type of an expression.
    Param(String),
}

impl Ty {
    pub fn arrow(param: Ty, result: Ty) -> Ty {
        Ty::Arrow(Box::new(param), Box::new(result))
    }

    /// Right-nested arrow from a parameter list to a result.
    pub fn arrows(params: impl IntoIterator<Item = Ty>, result: Ty) -> Ty {
        let params: Vec<Ty> = params.into_iter().collect();
        params
            .into_iter()
            .rev()
            .fold(result, |acc, p| Ty::arrow(p, acc))
    }

    pub fn list(elem: Ty) -> Ty {
        Ty::Named("list".into(), vec![elem])
    }

    pub fn tree(elem: Ty) -> Ty {
        Ty::Named("tree".into(), vec![elem])
    }

    pub fn named(name: &str) -> Ty {
        Ty::Named(name.into(), vec![])
    }

    pub fn is_arrow(&self) -> bool {
        matches!(self, Ty::Arrow(..))
    }

    /// Splits one arrow layer off.
    pub fn consume_arg(&self) -> Option<(&Ty, &Ty)> {
        match self {
            Ty::Arrow(p, r) => Some((p, r)),
            _ => None,
        }
    }

    pub fn contains_arrow(&self) -> bool {
        self.any(&|t| t.is_arrow())
    }

    pub fn contains_param(&self) -> bool {
        self.any(&|t| matches!(t, Ty::Param(_)))
    }

    fn any(&self, pred: &dyn Fn(&Ty) -> bool) -> bool {
        if pred(self) {
            return true;
        }
        match self {
            Ty::Named(_, args) | Ty::Tuple(args) => args.iter().any(|a| a.any(pred)),
            Ty::Arrow(p, r) => p.any(pred) || r.any(pred),
            _ => false,
        }
    }

    /// Replaces type parameters according to `map`.
    pub fn subst_params(&self, map: &HashMap<String, Ty>) -> Ty {
        match self {
            Ty::Param(p) => map.get(p).cloned().unwrap_or_else(|| self.clone()),
            Ty::Named(n, args) => {
                Ty::Named(n.clone(), args.iter().map(|a| a.subst_params(map)).collect())
            }
            Ty::Tuple(args) => Ty::Tuple(args.iter().map(|a| a.subst_params(map)).collect()),
            Ty::Arrow(p, r) => Ty::arrow(p.subst_params(map), r.subst_params(map)),
            _ => self.clone(),
        }
    }
}

impl fmt::Display for Ty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn atom(t: &Ty) -> String {
            match t {
                Ty::Arrow(..) | Ty::Tuple(_) => format!("({t})"),
                _ => t.to_string(),
            }
        }
        match self {
            Ty::Unit => write!(f, "unit"),
            Ty::Int => write!(f, "int"),
            Ty::Bool => write!(f, "bool"),
            Ty::Param(p) => write!(f, "'{p}"),
            Ty::Named(n, args) => match args.len() {
                0 => write!(f, "{n}"),
                1 => write!(f, "{} {n}", atom(&args[0])),
                _ => {
                    let args: Vec<String> = args.iter().map(|a| a.to_string()).collect();
                    write!(f, "({}) {n}", args.join(", "))
                }
            },
            Ty::Arrow(p, r) => {
                let lhs = if p.is_arrow() { format!("({p})") } else { atom_or_tuple(p) };
                write!(f, "{lhs} -> {r}")
            }
            Ty::Tuple(items) => {
                let items: Vec<String> = items.iter().map(atom).collect();
                write!(f, "{}", items.join(" * "))
            }
        }
    }
}

fn atom_or_tuple(t: &Ty) -> String {
    match t {
        Ty::Tuple(_) => format!("({t})"),
        _ => t.to_string(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Eq => "=",
            BinOp::Ne => "<>",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    pub fn is_arith(self) -> bool {
        matches!(self, BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div)
    }

    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge
        )
    }

    pub fn is_logical(self) -> bool {
        matches!(self, BinOp::And | BinOp::Or)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Clone, Debug)]
pub struct Expr {
    pub kind: ExprKind,
    pub loc: Loc,
    /// Filled in by the type checker.
    pub ty: Option<Ty>,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Expr {
    pub fn new(kind: ExprKind, loc: Loc) -> Self {
        Expr { kind, loc, ty: None }
    }

    pub fn typed(kind: ExprKind, loc: Loc, ty: Ty) -> Self {
        Expr { kind, loc, ty: Some(ty) }
    }

    pub fn var(name: &str) -> Self {
        Expr::new(ExprKind::Var(name.into()), Loc::default())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Unit,
    Var(String),
    Int(i64),
    Bool(bool),
    Ctor(String, Vec<Expr>),
    Tuple(Vec<Expr>),
    BinOp(BinOp, Box<Expr>, Box<Expr>),
    UnOp(UnOp, Box<Expr>),
    Cons(Box<Expr>, Box<Expr>),
    Nil,
    Seq(Box<Expr>, Box<Expr>),
    LetIn(Box<LetDef>, Box<Expr>),
    Match(Box<Expr>, Vec<(Pattern, Expr)>),
    If(Box<Expr>, Box<Expr>, Box<Expr>),
    Lambda(Lambda),
    App(Box<Expr>, Box<Expr>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Lambda {
    pub spec: Option<Spec>,
    pub params: Vec<Param>,
    pub ret: Option<Ty>,
    pub body: Box<Expr>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Param {
    pub name: String,
    /// `None` only for malformed input; the checker rejects it.
    pub ty: Option<Ty>,
}

impl Param {
    pub fn new(name: &str, ty: Ty) -> Self {
        Param { name: name.into(), ty: Some(ty) }
    }
}

#[derive(Clone, Debug)]
pub struct LetDef {
    pub is_rec: bool,
    pub name: String,
    pub params: Vec<Param>,
    pub ret: Option<Ty>,
    pub body: Expr,
    pub spec: Option<Spec>,
    pub loc: Loc,
}

impl PartialEq for LetDef {
    fn eq(&self, o: &Self) -> bool {
        self.is_rec == o.is_rec
            && self.name == o.name
            && self.params == o.params
            && self.ret == o.ret
            && self.body == o.body
            && self.spec == o.spec
    }
}

impl LetDef {
    pub fn is_function(&self) -> bool {
        !self.params.is_empty()
    }

    pub fn requires(&self) -> &[Formula] {
        self.spec.as_ref().map(|s| s.requires.as_slice()).unwrap_or(&[])
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Pattern {
    Wildcard,
    Var(String, Option<Ty>),
    Int(i64),
    Nil,
    Cons(Box<Pattern>, Box<Pattern>),
    Ctor(String, Vec<Pattern>),
    /// The empty tuple is the unit pattern `()`.
    Tuple(Vec<Pattern>),
}

impl Pattern {
    pub fn var(name: &str) -> Self {
        Pattern::Var(name.into(), None)
    }

    /// Variables bound by the pattern, left to right.
    pub fn vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Pattern::Var(n, _) => out.push(n.clone()),
            Pattern::Cons(h, t) => {
                h.collect_vars(out);
                t.collect_vars(out);
            }
            Pattern::Ctor(_, ps) | Pattern::Tuple(ps) => {
                ps.iter().for_each(|p| p.collect_vars(out))
            }
            _ => {}
        }
    }

    /// Same pattern with every type ascription removed.
    pub fn erase_types(&self) -> Pattern {
        self.map_types(&|_| None)
    }

    pub fn map_types(&self, f: &dyn Fn(&Ty) -> Option<Ty>) -> Pattern {
        match self {
            Pattern::Var(n, t) => Pattern::Var(n.clone(), t.as_ref().and_then(f)),
            Pattern::Cons(h, t) => {
                Pattern::Cons(Box::new(h.map_types(f)), Box::new(t.map_types(f)))
            }
            Pattern::Ctor(c, ps) => Pattern::Ctor(c.clone(), ps.iter().map(|p| p.map_types(f)).collect()),
            Pattern::Tuple(ps) => Pattern::Tuple(ps.iter().map(|p| p.map_types(f)).collect()),
            p => p.clone(),
        }
    }

    fn rename_vars(&self, map: &HashMap<String, String>) -> Pattern {
        match self {
            Pattern::Var(n, t) => Pattern::Var(map.get(n).cloned().unwrap_or_else(|| n.clone()), t.clone()),
            Pattern::Cons(h, t) => {
                Pattern::Cons(Box::new(h.rename_vars(map)), Box::new(t.rename_vars(map)))
            }
            Pattern::Ctor(c, ps) => Pattern::Ctor(c.clone(), ps.iter().map(|p| p.rename_vars(map)).collect()),
            Pattern::Tuple(ps) => Pattern::Tuple(ps.iter().map(|p| p.rename_vars(map)).collect()),
            p => p.clone(),
        }
    }
}

/// A behavioral specification attached to a definition or a lambda.
#[derive(Clone, Debug, Default)]
pub struct Spec {
    /// Names given to the result(s) by the header `r1, .., rk = f a1 .. an`.
    pub result_names: Vec<String>,
    pub fn_name: Option<String>,
    pub arg_names: Vec<String>,
    pub requires: Vec<Formula>,
    pub ensures: Vec<Formula>,
    pub loc: Loc,
}

impl PartialEq for Spec {
    fn eq(&self, o: &Self) -> bool {
        self.result_names == o.result_names
            && self.fn_name == o.fn_name
            && self.arg_names == o.arg_names
            && self.requires == o.requires
            && self.ensures == o.ensures
    }
}

impl Spec {
    pub fn has_header(&self) -> bool {
        !self.result_names.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Binder {
    pub name: String,
    pub ty: Option<Ty>,
}

impl Binder {
    pub fn new(name: &str, ty: Ty) -> Self {
        Binder { name: name.into(), ty: Some(ty) }
    }
}

/// Specification formulas. Terms and propositions share one type; a
/// proposition is a boolean-valued term.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Var(String),
    Int(i64),
    True,
    False,
    Unit,
    Ctor(String, Vec<Formula>),
    Tuple(Vec<Formula>),
    /// Application of a logical function or predicate symbol.
    App(String, Vec<Formula>),
    /// Arithmetic, comparison and the boolean connectives `/\` and `\/`.
    Bin(BinOp, Box<Formula>, Box<Formula>),
    Un(UnOp, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Forall(Vec<Binder>, Box<Formula>),
    Let(String, Box<Formula>, Box<Formula>),
    Match(Box<Formula>, Vec<(Pattern, Formula)>),
    /// `post (f : ty) a1 .. an r`
    PostMeta {
        func: Box<Formula>,
        fn_ty: Ty,
        args: Vec<Formula>,
        result: Box<Formula>,
    },
    /// Proof-obligation label introduced by VC generation.
    Labeled(String, Box<Formula>),
}

impl Formula {
    pub fn var(name: &str) -> Formula {
        Formula::Var(name.into())
    }

    pub fn app(name: &str, args: Vec<Formula>) -> Formula {
        Formula::App(name.into(), args)
    }

    pub fn bin(op: BinOp, a: Formula, b: Formula) -> Formula {
        Formula::Bin(op, Box::new(a), Box::new(b))
    }

    pub fn eq(a: Formula, b: Formula) -> Formula {
        Formula::bin(BinOp::Eq, a, b)
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::bin(BinOp::And, a, b)
    }

    pub fn negate(a: Formula) -> Formula {
        Formula::Un(UnOp::Not, Box::new(a))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn forall(binders: Vec<Binder>, body: Formula) -> Formula {
        if binders.is_empty() {
            body
        } else {
            Formula::Forall(binders, Box::new(body))
        }
    }

    /// Right-leaning conjunction; `True` when empty.
    pub fn conj(items: impl IntoIterator<Item = Formula>) -> Formula {
        let items: Vec<Formula> = items.into_iter().collect();
        let mut it = items.into_iter().rev();
        match it.next() {
            None => Formula::True,
            Some(last) => it.fold(last, |acc, f| Formula::and(f, acc)),
        }
    }

    /// Free variables in order of first occurrence.
    pub fn free_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        self.fv_into(&mut Vec::new(), &mut seen, &mut out);
        out
    }

    fn fv_into(&self, bound: &mut Vec<String>, seen: &mut HashSet<String>, out: &mut Vec<String>) {
        match self {
            Formula::Var(n) => {
                if !bound.contains(n) && seen.insert(n.clone()) {
                    out.push(n.clone());
                }
            }
            Formula::Int(_) | Formula::True | Formula::False | Formula::Unit => {}
            Formula::Ctor(_, args) | Formula::Tuple(args) | Formula::App(_, args) => {
                args.iter().for_each(|a| a.fv_into(bound, seen, out))
            }
            Formula::Bin(_, a, b) | Formula::Implies(a, b) => {
                a.fv_into(bound, seen, out);
                b.fv_into(bound, seen, out);
            }
            Formula::Un(_, a) | Formula::Labeled(_, a) => a.fv_into(bound, seen, out),
            Formula::Forall(bs, body) => {
                let n = bound.len();
                bound.extend(bs.iter().map(|b| b.name.clone()));
                body.fv_into(bound, seen, out);
                bound.truncate(n);
            }
            Formula::Let(x, t, body) => {
                t.fv_into(bound, seen, out);
                bound.push(x.clone());
                body.fv_into(bound, seen, out);
                bound.pop();
            }
            Formula::Match(s, arms) => {
                s.fv_into(bound, seen, out);
                for (p, body) in arms {
                    let n = bound.len();
                    bound.extend(p.vars());
                    body.fv_into(bound, seen, out);
                    bound.truncate(n);
                }
            }
            Formula::PostMeta { func, args, result, .. } => {
                func.fv_into(bound, seen, out);
                args.iter().for_each(|a| a.fv_into(bound, seen, out));
                result.fv_into(bound, seen, out);
            }
        }
    }

    /// Every identifier appearing anywhere (free, bound, or applied).
    pub fn all_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.names_into(&mut out);
        out
    }

    fn names_into(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Var(n) => {
                out.insert(n.clone());
            }
            Formula::Ctor(n, args) | Formula::App(n, args) => {
                out.insert(n.clone());
                args.iter().for_each(|a| a.names_into(out));
            }
            Formula::Tuple(args) => args.iter().for_each(|a| a.names_into(out)),
            Formula::Bin(_, a, b) | Formula::Implies(a, b) => {
                a.names_into(out);
                b.names_into(out);
            }
            Formula::Un(_, a) | Formula::Labeled(_, a) => a.names_into(out),
            Formula::Forall(bs, body) => {
                out.extend(bs.iter().map(|b| b.name.clone()));
                body.names_into(out);
            }
            Formula::Let(x, t, body) => {
                out.insert(x.clone());
                t.names_into(out);
                body.names_into(out);
            }
            Formula::Match(s, arms) => {
                s.names_into(out);
                for (p, b) in arms {
                    out.extend(p.vars());
                    b.names_into(out);
                }
            }
            Formula::PostMeta { func, args, result, .. } => {
                func.names_into(out);
                args.iter().for_each(|a| a.names_into(out));
                result.names_into(out);
            }
            _ => {}
        }
    }

    /// Capture-avoiding simultaneous substitution of free variables.
    pub fn subst(&self, map: &HashMap<String, Formula>) -> Formula {
        if map.is_empty() {
            return self.clone();
        }
        let mut avoid: HashSet<String> = HashSet::new();
        for t in map.values() {
            avoid.extend(t.free_vars());
        }
        self.subst_inner(map, &avoid)
    }

    pub fn subst1(&self, name: &str, by: &Formula) -> Formula {
        let mut m = HashMap::new();
        m.insert(name.to_string(), by.clone());
        self.subst(&m)
    }

    fn subst_inner(&self, map: &HashMap<String, Formula>, avoid: &HashSet<String>) -> Formula {
        let go = |f: &Formula| f.subst_inner(map, avoid);
        match self {
            Formula::Var(n) => map.get(n).cloned().unwrap_or_else(|| self.clone()),
            Formula::Int(_) | Formula::True | Formula::False | Formula::Unit => self.clone(),
            Formula::Ctor(n, args) => Formula::Ctor(n.clone(), args.iter().map(go).collect()),
            Formula::App(n, args) => Formula::App(n.clone(), args.iter().map(go).collect()),
            Formula::Tuple(args) => Formula::Tuple(args.iter().map(go).collect()),
            Formula::Bin(op, a, b) => Formula::bin(*op, go(a), go(b)),
            Formula::Un(op, a) => Formula::Un(*op, Box::new(go(a))),
            Formula::Implies(a, b) => Formula::implies(go(a), go(b)),
            Formula::Labeled(l, a) => Formula::Labeled(l.clone(), Box::new(go(a))),
            Formula::PostMeta { func, fn_ty, args, result } => Formula::PostMeta {
                func: Box::new(go(func)),
                fn_ty: fn_ty.clone(),
                args: args.iter().map(go).collect(),
                result: Box::new(go(result)),
            },
            Formula::Forall(bs, body) => {
                let names: Vec<String> = bs.iter().map(|b| b.name.clone()).collect();
                let (renaming, inner_map) = binder_plan(&names, map, avoid, body);
                let bs = bs
                    .iter()
                    .map(|b| Binder {
                        name: renaming.get(&b.name).cloned().unwrap_or_else(|| b.name.clone()),
                        ty: b.ty.clone(),
                    })
                    .collect();
                Formula::Forall(bs, Box::new(body.subst_inner(&inner_map, avoid)))
            }
            Formula::Let(x, t, body) => {
                let t = go(t);
                let (renaming, inner_map) = binder_plan(std::slice::from_ref(x), map, avoid, body);
                let x2 = renaming.get(x).cloned().unwrap_or_else(|| x.clone());
                Formula::Let(x2, Box::new(t), Box::new(body.subst_inner(&inner_map, avoid)))
            }
            Formula::Match(s, arms) => {
                let s = go(s);
                let arms = arms
                    .iter()
                    .map(|(p, body)| {
                        let (renaming, inner_map) = binder_plan(&p.vars(), map, avoid, body);
                        (p.rename_vars(&renaming), body.subst_inner(&inner_map, avoid))
                    })
                    .collect();
                Formula::Match(Box::new(s), arms)
            }
        }
    }

    /// Structural node count (used to bound expansion growth).
    pub fn size(&self) -> usize {
        1 + match self {
            Formula::Ctor(_, a) | Formula::App(_, a) | Formula::Tuple(a) => a.iter().map(|x| x.size()).sum(),
            Formula::Bin(_, a, b) | Formula::Implies(a, b) => a.size() + b.size(),
            Formula::Un(_, a) | Formula::Labeled(_, a) | Formula::Forall(_, a) => a.size(),
            Formula::Let(_, t, b) => t.size() + b.size(),
            Formula::Match(s, arms) => s.size() + arms.iter().map(|(_, b)| b.size()).sum::<usize>(),
            Formula::PostMeta { func, args, result, .. } => {
                func.size() + result.size() + args.iter().map(|x| x.size()).sum::<usize>()
            }
            _ => 0,
        }
    }
}

/// Decides how binders `names` must be renamed so that substituting `map`
/// underneath them captures nothing, and returns the map to use inside.
fn binder_plan(
    names: &[String],
    map: &HashMap<String, Formula>,
    avoid: &HashSet<String>,
    body: &Formula,
) -> (HashMap<String, String>, HashMap<String, Formula>) {
    let mut inner: HashMap<String, Formula> = map.clone();
    for n in names {
        inner.remove(n);
    }
    let mut renaming = HashMap::new();
    if inner.is_empty() {
        return (renaming, inner);
    }
    let mut taken: HashSet<String> = avoid.clone();
    taken.extend(body.all_names());
    taken.extend(inner.keys().cloned());
    for n in names {
        if avoid.contains(n) {
            let fresh = fresh_name(n, &taken);
            taken.insert(fresh.clone());
            inner.insert(n.clone(), Formula::Var(fresh.clone()));
            renaming.insert(n.clone(), fresh);
        }
    }
    (renaming, inner)
}

/// `base`, `base1`, `base2`, ... whichever is first not in `taken`.
pub fn fresh_name(base: &str, taken: &HashSet<String>) -> String {
    if !taken.contains(base) {
        return base.to_string();
    }
    (1..)
        .map(|i| format!("{base}{i}"))
        .find(|c| !taken.contains(c))
        .expect("unbounded")
}

#[derive(Clone, Debug, PartialEq)]
pub struct Variant {
    pub name: String,
    pub fields: Vec<Ty>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum TypeBody {
    Variants(Vec<Variant>),
    Record(Vec<(String, Ty)>),
    Alias(Ty),
}

#[derive(Clone, Debug)]
pub struct TypeDecl {
    pub name: String,
    pub params: Vec<String>,
    pub body: TypeBody,
    pub loc: Loc,
}

impl PartialEq for TypeDecl {
    fn eq(&self, o: &Self) -> bool {
        self.name == o.name && self.params == o.params && self.body == o.body
    }
}

/// A logical symbol usable only inside specifications. Without a body it is
/// uninterpreted.
#[derive(Clone, Debug)]
pub struct LogicDecl {
    pub name: String,
    pub params: Vec<(String, Ty)>,
    pub ret: Ty,
    pub predicate: bool,
    pub body: Option<Formula>,
    pub loc: Loc,
}

impl PartialEq for LogicDecl {
    fn eq(&self, o: &Self) -> bool {
        self.name == o.name
            && self.params == o.params
            && self.ret == o.ret
            && self.predicate == o.predicate
            && self.body == o.body
    }
}

#[derive(Clone, Debug)]
pub struct LemmaDecl {
    pub name: String,
    pub formula: Formula,
    pub loc: Loc,
}

impl PartialEq for LemmaDecl {
    fn eq(&self, o: &Self) -> bool {
        self.name == o.name && self.formula == o.formula
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TopLevel {
    TypeDecl(TypeDecl),
    LetDef(LetDef),
    Lemma(LemmaDecl),
    Expr(Expr),
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Program {
    pub prelude: Vec<LogicDecl>,
    pub items: Vec<TopLevel>,
}

impl Program {
    pub fn defs(&self) -> impl Iterator<Item = &LetDef> {
        self.items.iter().filter_map(|i| match i {
            TopLevel::LetDef(d) => Some(d),
            _ => None,
        })
    }

    pub fn def(&self, name: &str) -> Option<&LetDef> {
        self.defs().filter(|d| d.name == name).last()
    }

    pub fn type_decls(&self) -> impl Iterator<Item = &TypeDecl> {
        self.items.iter().filter_map(|i| match i {
            TopLevel::TypeDecl(d) => Some(d),
            _ => None,
        })
    }

    pub fn lemmas(&self) -> impl Iterator<Item = &LemmaDecl> {
        self.items.iter().filter_map(|i| match i {
            TopLevel::Lemma(l) => Some(l),
            _ => None,
        })
    }

    /// Removes every specification (definition specs, lambda attributes,
    /// logical declarations and lemmas), leaving the executable program.
    pub fn erase_specs(&self) -> Program {
        let items = self
            .items
            .iter()
            .filter(|i| !matches!(i, TopLevel::Lemma(_)))
            .map(|i| match i {
                TopLevel::LetDef(d) => TopLevel::LetDef(erase_def(d)),
                TopLevel::Expr(e) => TopLevel::Expr(erase_expr(e)),
                other => other.clone(),
            })
            .collect();
        Program { prelude: vec![], items }
    }
}

fn erase_def(d: &LetDef) -> LetDef {
    LetDef { spec: None, body: erase_expr(&d.body), ..d.clone() }
}

fn erase_expr(e: &Expr) -> Expr {
    map_expr(e, &mut |e| match &e.kind {
        ExprKind::Lambda(l) => Some(Expr {
            kind: ExprKind::Lambda(Lambda { spec: None, ..l.clone() }),
            ..e.clone()
        }),
        ExprKind::LetIn(d, body) => Some(Expr {
            kind: ExprKind::LetIn(Box::new(LetDef { spec: None, ..(**d).clone() }), body.clone()),
            ..e.clone()
        }),
        _ => None,
    })
}

/// Bottom-up rewrite: children first, then `f` may replace the node.
pub fn map_expr(e: &Expr, f: &mut dyn FnMut(&Expr) -> Option<Expr>) -> Expr {
    let kind = match &e.kind {
        ExprKind::Ctor(c, args) => ExprKind::Ctor(c.clone(), args.iter().map(|a| map_expr(a, f)).collect()),
        ExprKind::Tuple(args) => ExprKind::Tuple(args.iter().map(|a| map_expr(a, f)).collect()),
        ExprKind::BinOp(op, a, b) => ExprKind::BinOp(*op, Box::new(map_expr(a, f)), Box::new(map_expr(b, f))),
        ExprKind::UnOp(op, a) => ExprKind::UnOp(*op, Box::new(map_expr(a, f))),
        ExprKind::Cons(a, b) => ExprKind::Cons(Box::new(map_expr(a, f)), Box::new(map_expr(b, f))),
        ExprKind::Seq(a, b) => ExprKind::Seq(Box::new(map_expr(a, f)), Box::new(map_expr(b, f))),
        ExprKind::LetIn(d, body) => {
            let d = LetDef { body: map_expr(&d.body, f), ..(**d).clone() };
            ExprKind::LetIn(Box::new(d), Box::new(map_expr(body, f)))
        }
        ExprKind::Match(s, arms) => ExprKind::Match(
            Box::new(map_expr(s, f)),
            arms.iter().map(|(p, a)| (p.clone(), map_expr(a, f))).collect(),
        ),
        ExprKind::If(c, a, b) => ExprKind::If(
            Box::new(map_expr(c, f)),
            Box::new(map_expr(a, f)),
            Box::new(map_expr(b, f)),
        ),
        ExprKind::Lambda(l) => ExprKind::Lambda(Lambda { body: Box::new(map_expr(&l.body, f)), ..l.clone() }),
        ExprKind::App(a, b) => ExprKind::App(Box::new(map_expr(a, f)), Box::new(map_expr(b, f))),
        k => k.clone(),
    };
    let rebuilt = Expr { kind, loc: e.loc, ty: e.ty.clone() };
    f(&rebuilt).unwrap_or(rebuilt)
}

/// Variables occurring free in `e`, each with the type recorded on its first
/// occurrence, in order of first occurrence. Untyped occurrences report
/// `Ty::Param("?")`.
pub fn free_vars(e: &Expr) -> Vec<(String, Ty)> {
    let mut out: Vec<(String, Ty)> = Vec::new();
    fv_expr(e, &mut Vec::new(), &mut out);
    out
}

fn fv_expr(e: &Expr, bound: &mut Vec<String>, out: &mut Vec<(String, Ty)>) {
    match &e.kind {
        ExprKind::Var(n) => {
            if !bound.contains(n) && !out.iter().any(|(m, _)| m == n) {
                let ty = e.ty.clone().unwrap_or_else(|| Ty::Param("?".into()));
                out.push((n.clone(), ty));
            }
        }
        ExprKind::Unit | ExprKind::Int(_) | ExprKind::Bool(_) | ExprKind::Nil => {}
        ExprKind::Ctor(_, args) | ExprKind::Tuple(args) => args.iter().for_each(|a| fv_expr(a, bound, out)),
        ExprKind::BinOp(_, a, b) | ExprKind::Cons(a, b) | ExprKind::Seq(a, b) | ExprKind::App(a, b) => {
            fv_expr(a, bound, out);
            fv_expr(b, bound, out);
        }
        ExprKind::UnOp(_, a) => fv_expr(a, bound, out),
        ExprKind::If(c, a, b) => {
            fv_expr(c, bound, out);
            fv_expr(a, bound, out);
            fv_expr(b, bound, out);
        }
        ExprKind::LetIn(d, body) => {
            let n = bound.len();
            if d.is_rec {
                bound.push(d.name.clone());
            }
            bound.extend(d.params.iter().map(|p| p.name.clone()));
            fv_expr(&d.body, bound, out);
            bound.truncate(n);
            bound.push(d.name.clone());
            fv_expr(body, bound, out);
            bound.truncate(n);
        }
        ExprKind::Match(s, arms) => {
            fv_expr(s, bound, out);
            for (p, a) in arms {
                let n = bound.len();
                bound.extend(p.vars());
                fv_expr(a, bound, out);
                bound.truncate(n);
            }
        }
        ExprKind::Lambda(l) => {
            let n = bound.len();
            bound.extend(l.params.iter().map(|p| p.name.clone()));
            fv_expr(&l.body, bound, out);
            bound.truncate(n);
        }
    }
}

/// Turns every n-parameter lambda into n nested unary lambdas. A spec stays
/// on the innermost lambda.
pub fn normalize_curry(e: &Expr) -> Expr {
    map_expr(e, &mut |e| match &e.kind {
        ExprKind::Lambda(l) if l.params.len() > 1 => Some(curry_lambda(l, e.loc, e.ty.clone())),
        _ => None,
    })
}

fn curry_lambda(l: &Lambda, loc: Loc, ty: Option<Ty>) -> Expr {
    let (last, init) = l.params.split_last().expect("len > 1");
    let mut inner = Expr {
        kind: ExprKind::Lambda(Lambda {
            spec: l.spec.clone(),
            params: vec![last.clone()],
            ret: l.ret.clone(),
            body: l.body.clone(),
        }),
        loc,
        ty: None,
    };
    // result type of the lambda built so far
    let mut ret_so_far: Option<Ty> = l.ret.clone();
    let mut inner_ty: Option<Ty> = match (&last.ty, &ret_so_far) {
        (Some(p), Some(r)) => Some(Ty::arrow(p.clone(), r.clone())),
        _ => None,
    };
    inner.ty = inner_ty.clone();
    for (i, p) in init.iter().enumerate().rev() {
        ret_so_far = inner_ty.clone();
        inner_ty = match (&p.ty, &ret_so_far) {
            (Some(pt), Some(r)) => Some(Ty::arrow(pt.clone(), r.clone())),
            _ => None,
        };
        inner = Expr {
            kind: ExprKind::Lambda(Lambda {
                spec: None,
                params: vec![p.clone()],
                ret: ret_so_far.clone(),
                body: Box::new(inner),
            }),
            loc,
            ty: if i == 0 { ty.clone().or(inner_ty.clone()) } else { inner_ty.clone() },
        };
    }
    inner
}

/// Applies [`normalize_curry`] to every expression in the program.
pub fn normalize_program(p: &Program) -> Program {
    let items = p
        .items
        .iter()
        .map(|i| match i {
            TopLevel::LetDef(d) => TopLevel::LetDef(LetDef { body: normalize_curry(&d.body), ..d.clone() }),
            TopLevel::Expr(e) => TopLevel::Expr(normalize_curry(e)),
            other => other.clone(),
        })
        .collect();
    Program { prelude: p.prelude.clone(), items }
}
