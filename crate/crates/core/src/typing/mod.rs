//! Annotation-driven type checking.
//!
//! Every lambda and `let` parameter must carry a type; recursive functions
//! must declare their return type. Inside those constraints the checker
//! resolves the type of every expression with first-order unification, so
//! constructor type arguments and untyped `forall` binders are inferred.
//! Type variables never survive checking: anything left unresolved is
//! reported as unsupported polymorphism.

pub mod exhaustive;

use std::collections::HashMap;

use indexmap::IndexMap;

use crate::ast::*;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{loc}: {kind}")]
pub struct TypeError {
    pub loc: Loc,
    pub kind: TypeErrorKind,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TypeErrorKind {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("missing type annotation: {0}")]
    AnnotationMissing(String),
    #[error("type mismatch: expected {expected}, found {found}")]
    Mismatch { expected: Ty, found: Ty },
    #[error("expression of type {0} is not a function and cannot be applied")]
    NotAFunction(Ty),
    #[error("constructor `{name}` expects {expected} argument(s) but is given {found}")]
    ConstructorArity { name: String, expected: usize, found: usize },
    #[error("unknown constructor `{0}`")]
    UnknownConstructor(String),
    #[error("unknown type `{0}`")]
    UnknownType(String),
    #[error("unknown logical symbol `{0}`")]
    UnknownLogic(String),
    #[error("polymorphism is not supported: {0}")]
    Polymorphic(String),
    #[error("values of functional type {0} cannot be compared")]
    ArrowEquality(Ty),
    #[error("{0}")]
    Other(String),
}

fn err<T>(loc: Loc, kind: TypeErrorKind) -> Result<T, TypeError> {
    Err(TypeError { loc, kind })
}

type TResult<T> = Result<T, TypeError>;

/// A constructor of a data type, with field types over the type's
/// parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct CtorInfo {
    pub ty_name: String,
    pub params: Vec<String>,
    pub fields: Vec<Ty>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DataType {
    pub name: String,
    pub params: Vec<String>,
    pub variants: Vec<Variant>,
    /// Record fields; such types have no constructors usable in code.
    pub record: Option<Vec<(String, Ty)>>,
    pub builtin: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LogicSig {
    /// May mention type parameters (`Ty::Param`) for built-in generic
    /// symbols such as `length`.
    pub params: Vec<Ty>,
    pub ret: Ty,
    pub predicate: bool,
    pub builtin: bool,
}

/// Type and logical-symbol declarations visible to a program.
#[derive(Clone, Debug, Default)]
pub struct Signature {
    pub datatypes: IndexMap<String, DataType>,
    pub aliases: HashMap<String, (Vec<String>, Ty)>,
    pub ctors: HashMap<String, CtorInfo>,
    pub logic: IndexMap<String, LogicSig>,
}

/// Names of symbols callable in code without a definition.
pub const CODE_BUILTINS: &[&str] = &["max", "min", "abs"];

impl Signature {
    /// The built-in list and tree types and the logical library
    /// (`length`, `height`, `max`, `min`, `abs`).
    pub fn with_builtins() -> Self {
        let mut s = Signature::default();
        let a = || Ty::Param("a".into());
        s.add_datatype(DataType {
            name: "list".into(),
            params: vec!["a".into()],
            variants: vec![
                Variant { name: "Nil".into(), fields: vec![] },
                Variant { name: "Cons".into(), fields: vec![a(), Ty::list(a())] },
            ],
            record: None,
            builtin: true,
        });
        s.add_datatype(DataType {
            name: "tree".into(),
            params: vec!["a".into()],
            variants: vec![
                Variant { name: "Empty".into(), fields: vec![] },
                Variant { name: "Node".into(), fields: vec![Ty::tree(a()), a(), Ty::tree(a())] },
            ],
            record: None,
            builtin: true,
        });
        let logic = |params: Vec<Ty>, ret: Ty| LogicSig { params, ret, predicate: false, builtin: true };
        s.logic.insert("length".into(), logic(vec![Ty::list(a())], Ty::Int));
        s.logic.insert("height".into(), logic(vec![Ty::tree(a())], Ty::Int));
        s.logic.insert("max".into(), logic(vec![Ty::Int, Ty::Int], Ty::Int));
        s.logic.insert("min".into(), logic(vec![Ty::Int, Ty::Int], Ty::Int));
        s.logic.insert("abs".into(), logic(vec![Ty::Int], Ty::Int));
        s
    }

    pub fn add_datatype(&mut self, d: DataType) {
        for v in &d.variants {
            self.ctors.insert(
                v.name.clone(),
                CtorInfo { ty_name: d.name.clone(), params: d.params.clone(), fields: v.fields.clone() },
            );
        }
        self.datatypes.insert(d.name.clone(), d);
    }

    /// Field types of constructor `ctor` at the instance `targs` of its type.
    pub fn ctor_fields(&self, ctor: &str, targs: &[Ty]) -> Option<Vec<Ty>> {
        let info = self.ctors.get(ctor)?;
        let map: HashMap<String, Ty> = info.params.iter().cloned().zip(targs.iter().cloned()).collect();
        Some(info.fields.iter().map(|f| f.subst_params(&map)).collect())
    }

    /// Constructors of a named type in declaration order.
    pub fn ctors_of(&self, ty_name: &str) -> Option<&[Variant]> {
        self.datatypes.get(ty_name).map(|d| d.variants.as_slice())
    }

    /// Expands type aliases everywhere inside `t`.
    pub fn expand(&self, t: &Ty) -> Ty {
        match t {
            Ty::Named(n, args) => {
                let args: Vec<Ty> = args.iter().map(|a| self.expand(a)).collect();
                match self.aliases.get(n) {
                    Some((params, body)) => {
                        let map = params.iter().cloned().zip(args).collect();
                        self.expand(&body.subst_params(&map))
                    }
                    None => Ty::Named(n.clone(), args),
                }
            }
            Ty::Arrow(p, r) => Ty::arrow(self.expand(p), self.expand(r)),
            Ty::Tuple(ts) => Ty::Tuple(ts.iter().map(|x| self.expand(x)).collect()),
            t => t.clone(),
        }
    }
}

/// A checked program: every expression carries its type, every pattern
/// variable and `forall` binder its type, and all lambdas are unary.
#[derive(Clone, Debug)]
pub struct TypedProgram {
    pub program: Program,
    pub sig: Signature,
}

impl TypedProgram {
    /// Source type of a top-level definition, curried.
    pub fn def_type(&self, name: &str) -> Option<Ty> {
        let d = self.program.def(name)?;
        let params = d.params.iter().map(|p| p.ty.clone().expect("checked"));
        Some(Ty::arrows(params, d.ret.clone().or_else(|| d.body.ty.clone()).expect("checked")))
    }
}

pub fn check_program(p: &Program) -> TResult<TypedProgram> {
    let mut program = normalize_program(p);
    let mut c = Checker::new(Signature::with_builtins());
    c.declare_types(&program)?;
    c.check_prelude(&mut program.prelude)?;
    for item in program.items.iter_mut() {
        c.check_item(item)?;
    }
    Ok(TypedProgram { program, sig: c.sig })
}

/// Type-checks a standalone formula against an existing signature with the
/// given variables in scope, filling in binder and pattern types.
pub fn check_formula(
    sig: &Signature,
    vars: &[(String, Ty)],
    f: &mut Formula,
    loc: Loc,
) -> TResult<Ty> {
    let mut c = Checker::new(sig.clone());
    for (n, t) in vars {
        c.push(n, t.clone());
    }
    let t = c.formula(f, loc)?;
    c.zonk_formula(f, loc)?;
    let t = c.zonk(&t);
    c.no_metas(&t, loc)?;
    Ok(t)
}

struct Checker {
    sig: Signature,
    vars: HashMap<String, Vec<Ty>>,
    metas: Vec<Option<Ty>>,
}

fn meta_index(t: &Ty) -> Option<usize> {
    match t {
        Ty::Param(p) => p.strip_prefix('?').and_then(|n| n.parse().ok()),
        _ => None,
    }
}

impl Checker {
    fn new(sig: Signature) -> Self {
        Checker { sig, vars: HashMap::new(), metas: Vec::new() }
    }

    fn push(&mut self, name: &str, t: Ty) {
        self.vars.entry(name.to_string()).or_default().push(t);
    }

    fn pop(&mut self, name: &str) {
        let stack = self.vars.get_mut(name).expect("balanced push/pop");
        stack.pop();
        if stack.is_empty() {
            self.vars.remove(name);
        }
    }

    fn lookup(&self, name: &str) -> Option<&Ty> {
        self.vars.get(name).and_then(|s| s.last())
    }

    fn fresh(&mut self) -> Ty {
        self.metas.push(None);
        Ty::Param(format!("?{}", self.metas.len() - 1))
    }

    fn zonk(&self, t: &Ty) -> Ty {
        if let Some(i) = meta_index(t) {
            return match &self.metas[i] {
                Some(t) => self.zonk(t),
                None => t.clone(),
            };
        }
        match t {
            Ty::Named(n, args) => Ty::Named(n.clone(), args.iter().map(|a| self.zonk(a)).collect()),
            Ty::Arrow(p, r) => Ty::arrow(self.zonk(p), self.zonk(r)),
            Ty::Tuple(ts) => Ty::Tuple(ts.iter().map(|a| self.zonk(a)).collect()),
            t => t.clone(),
        }
    }

    fn occurs(&self, i: usize, t: &Ty) -> bool {
        let t = self.zonk(t);
        let mut found = false;
        walk_ty(&t, &mut |x| found |= meta_index(x) == Some(i));
        found
    }

    fn unify(&mut self, a: &Ty, b: &Ty) -> bool {
        let a = self.zonk(a);
        let b = self.zonk(b);
        match (meta_index(&a), meta_index(&b)) {
            (Some(i), Some(j)) if i == j => return true,
            (Some(i), _) => {
                if self.occurs(i, &b) {
                    return false;
                }
                self.metas[i] = Some(b);
                return true;
            }
            (_, Some(j)) => {
                if self.occurs(j, &a) {
                    return false;
                }
                self.metas[j] = Some(a);
                return true;
            }
            _ => {}
        }
        match (&a, &b) {
            (Ty::Named(n, xs), Ty::Named(m, ys)) => {
                n == m && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| self.unify(x, y))
            }
            (Ty::Arrow(p, r), Ty::Arrow(q, s)) => self.unify(p, q) && self.unify(r, s),
            (Ty::Tuple(xs), Ty::Tuple(ys)) => {
                xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| self.unify(x, y))
            }
            _ => a == b,
        }
    }

    fn expect(&mut self, loc: Loc, expected: &Ty, found: &Ty) -> TResult<()> {
        if self.unify(expected, found) {
            Ok(())
        } else {
            err(loc, TypeErrorKind::Mismatch { expected: self.zonk(expected), found: self.zonk(found) })
        }
    }

    fn no_metas(&self, t: &Ty, loc: Loc) -> TResult<()> {
        let mut bad = false;
        walk_ty(t, &mut |x| bad |= matches!(x, Ty::Param(_)));
        if bad {
            return err(
                loc,
                TypeErrorKind::Polymorphic(format!(
                    "the type {} is not fully determined; add a type annotation",
                    pretty_metas(t)
                )),
            );
        }
        Ok(())
    }

    /// Validates a written type: known names, right arity, no type
    /// variables, aliases expanded.
    fn annot(&self, t: &Ty, loc: Loc) -> TResult<Ty> {
        let t = self.sig.expand(t);
        let mut res = Ok(());
        walk_ty(&t, &mut |x| {
            if res.is_err() {
                return;
            }
            match x {
                Ty::Param(p) => {
                    res = err(
                        loc,
                        TypeErrorKind::Polymorphic(format!(
                            "type variable '{p} in an annotation; monomorphize the program"
                        )),
                    )
                }
                Ty::Named(n, args) => match self.sig.datatypes.get(n) {
                    None => res = err(loc, TypeErrorKind::UnknownType(n.clone())),
                    Some(d) if d.params.len() != args.len() => {
                        res = err(
                            loc,
                            TypeErrorKind::Other(format!(
                                "type `{n}` expects {} argument(s), given {}",
                                d.params.len(),
                                args.len()
                            )),
                        )
                    }
                    _ => {}
                },
                _ => {}
            }
        });
        res.map(|_| t)
    }

    // ---- declarations ----

    fn declare_types(&mut self, p: &Program) -> TResult<()> {
        for d in p.type_decls() {
            if self.sig.datatypes.contains_key(&d.name) || self.sig.aliases.contains_key(&d.name) {
                return err(d.loc, TypeErrorKind::Other(format!("type `{}` is already defined", d.name)));
            }
            match &d.body {
                TypeBody::Alias(t) => {
                    self.sig.aliases.insert(d.name.clone(), (d.params.clone(), t.clone()));
                }
                TypeBody::Variants(vs) => {
                    for v in vs {
                        if self.sig.ctors.contains_key(&v.name) {
                            return err(
                                d.loc,
                                TypeErrorKind::Other(format!("constructor `{}` is already defined", v.name)),
                            );
                        }
                    }
                    self.sig.add_datatype(DataType {
                        name: d.name.clone(),
                        params: d.params.clone(),
                        variants: vs.clone(),
                        record: None,
                        builtin: false,
                    });
                }
                TypeBody::Record(fs) => self.sig.add_datatype(DataType {
                    name: d.name.clone(),
                    params: d.params.clone(),
                    variants: vec![],
                    record: Some(fs.clone()),
                    builtin: false,
                }),
            }
        }
        // Field types may only mention declared types and the type's own
        // parameters.
        let decls: Vec<DataType> = self.sig.datatypes.values().filter(|d| !d.builtin).cloned().collect();
        let loc_of = |name: &str| p.type_decls().find(|d| d.name == name).map(|d| d.loc).unwrap_or_default();
        for d in decls {
            let fields: Vec<Ty> = d
                .variants
                .iter()
                .flat_map(|v| v.fields.clone())
                .chain(d.record.iter().flatten().map(|(_, t)| t.clone()))
                .collect();
            for f in fields {
                let f = self.sig.expand(&f);
                let mut res = Ok(());
                walk_ty(&f, &mut |x| match x {
                    Ty::Param(q) if !d.params.contains(q) => {
                        res = err(loc_of(&d.name), TypeErrorKind::Other(format!("unbound type variable '{q}")))
                    }
                    Ty::Named(n, _) if !self.sig.datatypes.contains_key(n) => {
                        res = err(loc_of(&d.name), TypeErrorKind::UnknownType(n.clone()))
                    }
                    _ => {}
                });
                res?;
            }
            // store expanded field types
            let expanded: Vec<Variant> = d
                .variants
                .iter()
                .map(|v| Variant { name: v.name.clone(), fields: v.fields.iter().map(|f| self.sig.expand(f)).collect() })
                .collect();
            let mut nd = d.clone();
            nd.variants = expanded;
            self.sig.add_datatype(nd);
        }
        Ok(())
    }

    fn check_prelude(&mut self, prelude: &mut [LogicDecl]) -> TResult<()> {
        for d in prelude.iter_mut() {
            if self.sig.logic.get(&d.name).is_some_and(|s| s.builtin) {
                return err(d.loc, TypeErrorKind::Other(format!("`{}` redefines a built-in symbol", d.name)));
            }
            let mut params = Vec::new();
            for (n, t) in d.params.iter_mut() {
                *t = self.annot(t, d.loc)?;
                params.push(t.clone());
                let _ = n;
            }
            d.ret = self.annot(&d.ret, d.loc)?;
            self.sig.logic.insert(
                d.name.clone(),
                LogicSig { params, ret: d.ret.clone(), predicate: d.predicate, builtin: false },
            );
        }
        for d in prelude.iter_mut() {
            if let Some(body) = &mut d.body {
                for (n, t) in &d.params {
                    self.push(n, t.clone());
                }
                let t = self.formula(body, d.loc)?;
                self.expect(d.loc, &d.ret, &t)?;
                for (n, _) in &d.params {
                    self.pop(n);
                }
                self.zonk_formula(body, d.loc)?;
            }
        }
        Ok(())
    }

    fn check_item(&mut self, item: &mut TopLevel) -> TResult<()> {
        match item {
            TopLevel::TypeDecl(_) => Ok(()),
            TopLevel::Lemma(l) => {
                let t = self.formula(&mut l.formula, l.loc)?;
                self.expect(l.loc, &Ty::Bool, &t)?;
                self.zonk_formula(&mut l.formula, l.loc)
            }
            TopLevel::Expr(e) => {
                self.expr(e)?;
                self.zonk_expr(e)
            }
            TopLevel::LetDef(d) => {
                let t = self.def(d)?;
                self.zonk_def(d)?;
                let t = self.zonk(&t);
                self.no_metas(&t, d.loc)?;
                self.push(&d.name.clone(), t);
                Ok(())
            }
        }
    }

    /// Checks a definition and returns its (curried) type. The defined name
    /// is in scope in the body only when the definition is recursive.
    fn def(&mut self, d: &mut LetDef) -> TResult<Ty> {
        let mut ptys = Vec::new();
        for p in d.params.iter_mut() {
            let Some(t) = &p.ty else {
                return err(
                    d.loc,
                    TypeErrorKind::AnnotationMissing(format!("parameter `{}` of `{}` has no type", p.name, d.name)),
                );
            };
            let t = self.annot(t, d.loc)?;
            p.ty = Some(t.clone());
            ptys.push(t);
        }
        let ret = match &d.ret {
            Some(t) => Some(self.annot(t, d.loc)?),
            None => None,
        };
        d.ret = ret.clone();
        if d.is_rec {
            if d.params.is_empty() {
                return err(d.loc, TypeErrorKind::Other(format!("recursive definition `{}` must be a function", d.name)));
            }
            if ret.is_none() {
                return err(
                    d.loc,
                    TypeErrorKind::AnnotationMissing(format!("recursive function `{}` needs a return type", d.name)),
                );
            }
        }
        let ret_ty = ret.clone().unwrap_or_else(|| self.fresh());
        if d.is_rec {
            self.push(&d.name, Ty::arrows(ptys.clone(), ret_ty.clone()));
        }
        for (p, t) in d.params.iter().zip(&ptys) {
            self.push(&p.name, t.clone());
        }
        let body_ty = self.expr(&mut d.body)?;
        self.expect(d.body.loc, &ret_ty, &body_ty)?;
        for p in &d.params {
            self.pop(&p.name);
        }
        if d.is_rec {
            self.pop(&d.name);
        }
        if let Some(spec) = &mut d.spec {
            let names: Vec<String> = d.params.iter().map(|p| p.name.clone()).collect();
            let args: Vec<(String, Ty)> = names.into_iter().zip(ptys.iter().cloned()).collect();
            self.spec(spec, &d.name, &args, &ret_ty)?;
        }
        Ok(Ty::arrows(ptys, ret_ty))
    }

    fn spec(&mut self, spec: &mut Spec, fname: &str, args: &[(String, Ty)], ret: &Ty) -> TResult<()> {
        let loc = spec.loc;
        let mut bound: Vec<(String, Ty)> = args.to_vec();
        if spec.has_header() {
            if let Some(f) = &spec.fn_name {
                if f != fname {
                    return err(
                        loc,
                        TypeErrorKind::Other(format!("specification header names `{f}` but annotates `{fname}`")),
                    );
                }
            }
            if spec.arg_names.len() != args.len() {
                return err(
                    loc,
                    TypeErrorKind::Other(format!(
                        "specification header names {} argument(s) but `{fname}` has {}",
                        spec.arg_names.len(),
                        args.len()
                    )),
                );
            }
            for (n, (_, t)) in spec.arg_names.iter().zip(args) {
                bound.push((n.clone(), t.clone()));
            }
        }
        for (n, t) in &bound {
            self.push(n, t.clone());
        }
        for f in spec.requires.iter_mut() {
            let t = self.formula(f, loc)?;
            self.expect(loc, &Ty::Bool, &t)?;
        }
        let results: Vec<(String, Ty)> = match spec.result_names.len() {
            0 => vec![("result".to_string(), ret.clone())],
            1 => vec![(spec.result_names[0].clone(), ret.clone())],
            k => {
                let comps: Vec<Ty> = (0..k).map(|_| self.fresh()).collect();
                self.expect(loc, &Ty::Tuple(comps.clone()), ret)?;
                spec.result_names.iter().cloned().zip(comps).collect()
            }
        };
        for (n, t) in &results {
            self.push(n, t.clone());
        }
        for f in spec.ensures.iter_mut() {
            let t = self.formula(f, loc)?;
            self.expect(loc, &Ty::Bool, &t)?;
        }
        for (n, _) in results.iter().rev() {
            self.pop(n);
        }
        for (n, _) in bound.iter().rev() {
            self.pop(n);
        }
        Ok(())
    }

    // ---- expressions ----

    fn expr(&mut self, e: &mut Expr) -> TResult<Ty> {
        let loc = e.loc;
        let t = stacker::maybe_grow(64 * 1024, 2 * 1024 * 1024, || self.expr_kind(&mut e.kind, loc))?;
        e.ty = Some(t.clone());
        Ok(t)
    }

    fn expr_kind(&mut self, kind: &mut ExprKind, loc: Loc) -> TResult<Ty> {
        match kind {
            ExprKind::Unit => Ok(Ty::Unit),
            ExprKind::Int(_) => Ok(Ty::Int),
            ExprKind::Bool(_) => Ok(Ty::Bool),
            ExprKind::Var(x) => match self.lookup(x) {
                Some(t) => Ok(t.clone()),
                None if CODE_BUILTINS.contains(&x.as_str()) => Ok(builtin_code_type(x)),
                None => err(loc, TypeErrorKind::UnboundVariable(x.clone())),
            },
            ExprKind::Ctor(c, args) => {
                let (fields, ty) = self.instantiate_ctor(c, args.len(), loc)?;
                if fields.len() == 1 && args.len() > 1 {
                    let tuple = Expr::new(ExprKind::Tuple(std::mem::take(args)), loc);
                    args.push(tuple);
                }
                for (a, f) in args.iter_mut().zip(&fields) {
                    let t = self.expr(a)?;
                    self.expect(a.loc, f, &t)?;
                }
                Ok(ty)
            }
            ExprKind::Nil => Ok(Ty::list(self.fresh())),
            ExprKind::Cons(h, t) => {
                let th = self.expr(h)?;
                let tt = self.expr(t)?;
                self.expect(t.loc, &Ty::list(th.clone()), &tt)?;
                Ok(Ty::list(th))
            }
            ExprKind::Tuple(es) => {
                let mut ts = Vec::new();
                for e in es.iter_mut() {
                    ts.push(self.expr(e)?);
                }
                Ok(Ty::Tuple(ts))
            }
            ExprKind::BinOp(op, a, b) => {
                let ta = self.expr(a)?;
                let tb = self.expr(b)?;
                self.binop(*op, &ta, &tb, a.loc, b.loc)
            }
            ExprKind::UnOp(op, a) => {
                let ta = self.expr(a)?;
                let want = if *op == UnOp::Neg { Ty::Int } else { Ty::Bool };
                self.expect(a.loc, &want, &ta)?;
                Ok(want)
            }
            ExprKind::Seq(a, b) => {
                self.expr(a)?;
                self.expr(b)
            }
            ExprKind::LetIn(d, body) => {
                let td = self.def(d)?;
                if d.spec.as_ref().is_some_and(|s| !s.requires.is_empty()) && !d.is_function() {
                    return err(d.loc, TypeErrorKind::Other("`requires` on a non-function binding".into()));
                }
                self.push(&d.name, td);
                let tb = self.expr(body)?;
                self.pop(&d.name);
                Ok(tb)
            }
            ExprKind::Match(s, arms) => {
                let ts = self.expr(s)?;
                let result = self.fresh();
                for (p, body) in arms.iter_mut() {
                    let mut binds = Vec::new();
                    self.pattern(p, &ts, body.loc, &mut binds)?;
                    for (n, t) in &binds {
                        self.push(n, t.clone());
                    }
                    let tb = self.expr(body)?;
                    self.expect(body.loc, &result, &tb)?;
                    for (n, _) in binds.iter().rev() {
                        self.pop(n);
                    }
                }
                Ok(result)
            }
            ExprKind::If(c, a, b) => {
                let tc = self.expr(c)?;
                self.expect(c.loc, &Ty::Bool, &tc)?;
                let ta = self.expr(a)?;
                let tb = self.expr(b)?;
                self.expect(b.loc, &ta, &tb)?;
                Ok(ta)
            }
            ExprKind::Lambda(l) => {
                let mut ptys = Vec::new();
                for p in l.params.iter_mut() {
                    let Some(t) = &p.ty else {
                        return err(
                            loc,
                            TypeErrorKind::AnnotationMissing(format!("lambda parameter `{}` has no type", p.name)),
                        );
                    };
                    let t = self.annot(t, loc)?;
                    p.ty = Some(t.clone());
                    ptys.push(t);
                }
                let ret = match &l.ret {
                    Some(t) => Some(self.annot(t, loc)?),
                    None => None,
                };
                for (p, t) in l.params.iter().zip(&ptys) {
                    self.push(&p.name, t.clone());
                }
                let tb = self.expr(&mut l.body)?;
                if let Some(r) = &ret {
                    self.expect(l.body.loc, r, &tb)?;
                }
                l.ret = Some(tb.clone());
                for p in &l.params {
                    self.pop(&p.name);
                }
                if let Some(spec) = &mut l.spec {
                    if spec.has_header() {
                        return err(spec.loc, TypeErrorKind::Other("lambda specifications take no header".into()));
                    }
                    let args: Vec<(String, Ty)> =
                        l.params.iter().map(|p| p.name.clone()).zip(ptys.iter().cloned()).collect();
                    self.spec(spec, "", &args, &tb)?;
                }
                Ok(Ty::arrows(ptys, tb))
            }
            ExprKind::App(f, a) => {
                let tf = self.expr(f)?;
                let ta = self.expr(a)?;
                let tf = self.zonk(&tf);
                match tf {
                    Ty::Arrow(p, r) => {
                        self.expect(a.loc, &p, &ta)?;
                        Ok(*r)
                    }
                    t if meta_index(&t).is_some() => {
                        let r = self.fresh();
                        self.expect(f.loc, &t, &Ty::arrow(ta, r.clone()))?;
                        Ok(r)
                    }
                    t => err(f.loc, TypeErrorKind::NotAFunction(t)),
                }
            }
        }
    }

    fn binop(&mut self, op: BinOp, ta: &Ty, tb: &Ty, la: Loc, lb: Loc) -> TResult<Ty> {
        if op.is_arith() {
            self.expect(la, &Ty::Int, ta)?;
            self.expect(lb, &Ty::Int, tb)?;
            Ok(Ty::Int)
        } else if op.is_logical() {
            self.expect(la, &Ty::Bool, ta)?;
            self.expect(lb, &Ty::Bool, tb)?;
            Ok(Ty::Bool)
        } else if matches!(op, BinOp::Eq | BinOp::Ne) {
            self.expect(lb, ta, tb)?;
            let t = self.zonk(ta);
            if t.contains_arrow() {
                return err(la, TypeErrorKind::ArrowEquality(t));
            }
            Ok(Ty::Bool)
        } else {
            self.expect(la, &Ty::Int, ta)?;
            self.expect(lb, &Ty::Int, tb)?;
            Ok(Ty::Bool)
        }
    }

    /// Fresh instance of a constructor: its field types and result type.
    /// Accepts `n` arguments when they can be packed into a single tuple
    /// field.
    fn instantiate_ctor(&mut self, c: &str, n: usize, loc: Loc) -> TResult<(Vec<Ty>, Ty)> {
        let Some(info) = self.sig.ctors.get(c).cloned() else {
            return err(loc, TypeErrorKind::UnknownConstructor(c.to_string()));
        };
        let targs: Vec<Ty> = info.params.iter().map(|_| self.fresh()).collect();
        let fields = self.sig.ctor_fields(c, &targs).expect("known ctor");
        let packable = fields.len() == 1 && n > 1 && matches!(&fields[0], Ty::Tuple(ts) if ts.len() == n);
        if fields.len() != n && !packable {
            return err(
                loc,
                TypeErrorKind::ConstructorArity { name: c.to_string(), expected: fields.len(), found: n },
            );
        }
        Ok((fields, Ty::Named(info.ty_name, targs)))
    }

    fn pattern(&mut self, p: &mut Pattern, ty: &Ty, loc: Loc, binds: &mut Vec<(String, Ty)>) -> TResult<()> {
        match p {
            Pattern::Wildcard => Ok(()),
            Pattern::Var(n, asc) => {
                if let Some(a) = asc {
                    let a = self.annot(a, loc)?;
                    self.expect(loc, &a, ty)?;
                }
                if binds.iter().any(|(m, _)| m == n) {
                    return err(loc, TypeErrorKind::Other(format!("variable `{n}` is bound twice in this pattern")));
                }
                *asc = Some(ty.clone());
                binds.push((n.clone(), ty.clone()));
                Ok(())
            }
            Pattern::Int(_) => self.expect(loc, &Ty::Int, ty),
            Pattern::Nil => {
                let e = self.fresh();
                self.expect(loc, ty, &Ty::list(e))
            }
            Pattern::Cons(h, t) => {
                let e = self.fresh();
                self.expect(loc, ty, &Ty::list(e.clone()))?;
                self.pattern(h, &e, loc, binds)?;
                self.pattern(t, &Ty::list(e), loc, binds)
            }
            Pattern::Ctor(c, ps) => {
                let (fields, cty) = self.instantiate_ctor(c, ps.len(), loc)?;
                self.expect(loc, ty, &cty)?;
                if fields.len() == 1 && ps.len() > 1 {
                    let tuple = Pattern::Tuple(std::mem::take(ps));
                    ps.push(tuple);
                }
                for (sp, f) in ps.iter_mut().zip(&fields) {
                    self.pattern(sp, f, loc, binds)?;
                }
                Ok(())
            }
            Pattern::Tuple(ps) => {
                if ps.is_empty() {
                    return self.expect(loc, &Ty::Unit, ty);
                }
                let ts: Vec<Ty> = ps.iter().map(|_| self.fresh()).collect();
                self.expect(loc, ty, &Ty::Tuple(ts.clone()))?;
                for (sp, t) in ps.iter_mut().zip(&ts) {
                    self.pattern(sp, t, loc, binds)?;
                }
                Ok(())
            }
        }
    }

    // ---- formulas ----

    fn formula(&mut self, f: &mut Formula, loc: Loc) -> TResult<Ty> {
        match f {
            Formula::Var(x) => match self.lookup(x) {
                Some(t) => Ok(t.clone()),
                None => match self.sig.logic.get(x.as_str()) {
                    Some(s) if s.params.is_empty() => Ok(s.ret.clone()),
                    _ => err(loc, TypeErrorKind::UnboundVariable(x.clone())),
                },
            },
            Formula::Int(_) => Ok(Ty::Int),
            Formula::True | Formula::False => Ok(Ty::Bool),
            Formula::Unit => Ok(Ty::Unit),
            Formula::Ctor(c, args) => {
                let (fields, ty) = self.instantiate_ctor(c, args.len(), loc)?;
                if fields.len() == 1 && args.len() > 1 {
                    let tuple = Formula::Tuple(std::mem::take(args));
                    args.push(tuple);
                }
                for (a, ft) in args.iter_mut().zip(&fields) {
                    let t = self.formula(a, loc)?;
                    self.expect(loc, ft, &t)?;
                }
                Ok(ty)
            }
            Formula::Tuple(fs) => {
                let mut ts = Vec::new();
                for x in fs.iter_mut() {
                    ts.push(self.formula(x, loc)?);
                }
                Ok(Ty::Tuple(ts))
            }
            Formula::App(name, args) => {
                if self.lookup(name).is_some() {
                    return err(
                        loc,
                        TypeErrorKind::Other(format!(
                            "program function `{name}` cannot be applied inside a specification; use `post`"
                        )),
                    );
                }
                let Some(sig) = self.sig.logic.get(name.as_str()).cloned() else {
                    return err(loc, TypeErrorKind::UnknownLogic(name.clone()));
                };
                if sig.params.len() != args.len() {
                    return err(
                        loc,
                        TypeErrorKind::Other(format!(
                            "`{name}` expects {} argument(s), given {}",
                            sig.params.len(),
                            args.len()
                        )),
                    );
                }
                let mut inst: HashMap<String, Ty> = HashMap::new();
                let mut generic = Vec::new();
                for p in &sig.params {
                    walk_ty(p, &mut |x| {
                        if let Ty::Param(q) = x {
                            generic.push(q.clone());
                        }
                    });
                }
                for q in generic {
                    if let std::collections::hash_map::Entry::Vacant(slot) = inst.entry(q) {
                        slot.insert(self.fresh());
                    }
                }
                for (a, p) in args.iter_mut().zip(&sig.params) {
                    let t = self.formula(a, loc)?;
                    self.expect(loc, &p.subst_params(&inst), &t)?;
                }
                Ok(sig.ret.subst_params(&inst))
            }
            Formula::Bin(op, a, b) => {
                let ta = self.formula(a, loc)?;
                let tb = self.formula(b, loc)?;
                self.binop(*op, &ta, &tb, loc, loc)
            }
            Formula::Un(op, a) => {
                let ta = self.formula(a, loc)?;
                let want = if *op == UnOp::Neg { Ty::Int } else { Ty::Bool };
                self.expect(loc, &want, &ta)?;
                Ok(want)
            }
            Formula::Implies(a, b) => {
                let ta = self.formula(a, loc)?;
                self.expect(loc, &Ty::Bool, &ta)?;
                let tb = self.formula(b, loc)?;
                self.expect(loc, &Ty::Bool, &tb)?;
                Ok(Ty::Bool)
            }
            Formula::Forall(bs, body) => {
                let mut tys = Vec::new();
                for b in bs.iter() {
                    let t = match &b.ty {
                        Some(t) => self.annot(t, loc)?,
                        None => self.fresh(),
                    };
                    tys.push(t);
                }
                for (b, t) in bs.iter().zip(&tys) {
                    self.push(&b.name, t.clone());
                }
                let tb = self.formula(body, loc)?;
                self.expect(loc, &Ty::Bool, &tb)?;
                for b in bs.iter().rev() {
                    self.pop(&b.name);
                }
                for (b, t) in bs.iter_mut().zip(tys) {
                    b.ty = Some(t);
                }
                Ok(Ty::Bool)
            }
            Formula::Let(x, t, body) => {
                let tt = self.formula(t, loc)?;
                self.push(x, tt);
                let tb = self.formula(body, loc)?;
                self.pop(x);
                Ok(tb)
            }
            Formula::Match(s, arms) => {
                let ts = self.formula(s, loc)?;
                let result = self.fresh();
                for (p, body) in arms.iter_mut() {
                    let mut binds = Vec::new();
                    self.pattern(p, &ts, loc, &mut binds)?;
                    for (n, t) in &binds {
                        self.push(n, t.clone());
                    }
                    let tb = self.formula(body, loc)?;
                    self.expect(loc, &result, &tb)?;
                    for (n, _) in binds.iter().rev() {
                        self.pop(n);
                    }
                }
                Ok(result)
            }
            Formula::PostMeta { func, fn_ty, args, result } => {
                let declared = self.annot(fn_ty, loc)?;
                if !declared.is_arrow() {
                    return err(
                        loc,
                        TypeErrorKind::Other(format!("`post` needs a function type, found {declared}")),
                    );
                }
                *fn_ty = declared.clone();
                let tf = self.formula(func, loc)?;
                self.expect(loc, &declared, &tf)?;
                let mut cur = declared;
                for a in args.iter_mut() {
                    let Ty::Arrow(p, r) = cur.clone() else {
                        return err(loc, TypeErrorKind::Other("`post` is given more arguments than its function takes".into()));
                    };
                    let ta = self.formula(a, loc)?;
                    self.expect(loc, &p, &ta)?;
                    cur = *r;
                }
                let tr = self.formula(result, loc)?;
                self.expect(loc, &cur, &tr)?;
                Ok(Ty::Bool)
            }
            Formula::Labeled(_, inner) => self.formula(inner, loc),
        }
    }

    // ---- resolution of metavariables ----

    fn zonk_checked(&self, t: &Ty, loc: Loc) -> TResult<Ty> {
        let t = self.zonk(t);
        self.no_metas(&t, loc)?;
        Ok(t)
    }

    fn zonk_pattern(&self, p: &mut Pattern, loc: Loc) -> TResult<()> {
        match p {
            Pattern::Var(_, Some(t)) => *t = self.zonk_checked(t, loc)?,
            Pattern::Cons(h, t) => {
                self.zonk_pattern(h, loc)?;
                self.zonk_pattern(t, loc)?;
            }
            Pattern::Ctor(_, ps) | Pattern::Tuple(ps) => {
                for q in ps {
                    self.zonk_pattern(q, loc)?;
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn zonk_formula(&self, f: &mut Formula, loc: Loc) -> TResult<()> {
        match f {
            Formula::Forall(bs, body) => {
                for b in bs.iter_mut() {
                    let t = b.ty.as_ref().expect("set during checking");
                    let t = self.zonk(t);
                    if self.no_metas(&t, loc).is_err() {
                        return err(
                            loc,
                            TypeErrorKind::Polymorphic(format!(
                                "cannot infer the type of `{}`; add an annotation",
                                b.name
                            )),
                        );
                    }
                    b.ty = Some(t);
                }
                self.zonk_formula(body, loc)
            }
            Formula::Match(s, arms) => {
                self.zonk_formula(s, loc)?;
                for (p, b) in arms {
                    self.zonk_pattern(p, loc)?;
                    self.zonk_formula(b, loc)?;
                }
                Ok(())
            }
            Formula::Ctor(_, xs) | Formula::Tuple(xs) | Formula::App(_, xs) => {
                xs.iter_mut().try_for_each(|x| self.zonk_formula(x, loc))
            }
            Formula::Bin(_, a, b) | Formula::Implies(a, b) | Formula::Let(_, a, b) => {
                self.zonk_formula(a, loc)?;
                self.zonk_formula(b, loc)
            }
            Formula::Un(_, a) | Formula::Labeled(_, a) => self.zonk_formula(a, loc),
            Formula::PostMeta { func, args, result, .. } => {
                self.zonk_formula(func, loc)?;
                args.iter_mut().try_for_each(|x| self.zonk_formula(x, loc))?;
                self.zonk_formula(result, loc)
            }
            _ => Ok(()),
        }
    }

    fn zonk_spec(&self, s: &mut Spec) -> TResult<()> {
        let loc = s.loc;
        for f in s.requires.iter_mut().chain(s.ensures.iter_mut()) {
            self.zonk_formula(f, loc)?;
        }
        Ok(())
    }

    fn zonk_def(&self, d: &mut LetDef) -> TResult<()> {
        self.zonk_expr(&mut d.body)?;
        if let Some(r) = &d.ret {
            d.ret = Some(self.zonk_checked(r, d.loc)?);
        } else {
            d.ret = d.body.ty.clone();
        }
        if let Some(s) = &mut d.spec {
            self.zonk_spec(s)?;
        }
        Ok(())
    }

    fn zonk_expr(&self, e: &mut Expr) -> TResult<()> {
        let loc = e.loc;
        if let Some(t) = &e.ty {
            e.ty = Some(self.zonk_checked(t, loc)?);
        }
        stacker::maybe_grow(64 * 1024, 2 * 1024 * 1024, || match &mut e.kind {
            ExprKind::Ctor(_, xs) | ExprKind::Tuple(xs) => xs.iter_mut().try_for_each(|x| self.zonk_expr(x)),
            ExprKind::BinOp(_, a, b) | ExprKind::Cons(a, b) | ExprKind::Seq(a, b) | ExprKind::App(a, b) => {
                self.zonk_expr(a)?;
                self.zonk_expr(b)
            }
            ExprKind::UnOp(_, a) => self.zonk_expr(a),
            ExprKind::If(c, a, b) => {
                self.zonk_expr(c)?;
                self.zonk_expr(a)?;
                self.zonk_expr(b)
            }
            ExprKind::LetIn(d, body) => {
                self.zonk_def(d)?;
                self.zonk_expr(body)
            }
            ExprKind::Match(s, arms) => {
                self.zonk_expr(s)?;
                for (p, b) in arms.iter_mut() {
                    self.zonk_pattern(p, b.loc)?;
                    self.zonk_expr(b)?;
                }
                Ok(())
            }
            ExprKind::Lambda(l) => {
                if let Some(r) = &l.ret {
                    l.ret = Some(self.zonk_checked(r, loc)?);
                }
                if let Some(s) = &mut l.spec {
                    self.zonk_spec(s)?;
                }
                self.zonk_expr(&mut l.body)
            }
            _ => Ok(()),
        })
    }
}

fn builtin_code_type(name: &str) -> Ty {
    match name {
        "abs" => Ty::arrow(Ty::Int, Ty::Int),
        _ => Ty::arrows([Ty::Int, Ty::Int], Ty::Int),
    }
}

/// Pre-order walk over a type and all its components.
pub fn walk_ty(t: &Ty, f: &mut dyn FnMut(&Ty)) {
    f(t);
    match t {
        Ty::Named(_, args) | Ty::Tuple(args) => args.iter().for_each(|a| walk_ty(a, f)),
        Ty::Arrow(p, r) => {
            walk_ty(p, f);
            walk_ty(r, f);
        }
        _ => {}
    }
}

fn pretty_metas(t: &Ty) -> String {
    t.to_string().replace("'?", "'_")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse_expr, parse_program};

    fn check_src(src: &str) -> TResult<TypedProgram> {
        check_program(&parse_program(src).unwrap())
    }

    fn expr_type(src: &str, env: &[(&str, Ty)]) -> TResult<Ty> {
        let mut e = parse_expr(src).unwrap();
        let mut c = Checker::new(Signature::with_builtins());
        for (n, t) in env {
            c.push(n, t.clone());
        }
        let t = c.expr(&mut e)?;
        Ok(c.zonk(&t))
    }

    #[test]
    fn identity_lambda() {
        assert_eq!(expr_type("fun (x:int):int -> x", &[]).unwrap(), Ty::arrow(Ty::Int, Ty::Int));
    }

    #[test]
    fn partial_application_consumes_one_arrow() {
        let k = Ty::arrows([Ty::Int, Ty::Int], Ty::Int);
        assert_eq!(expr_type("(k 3)", &[("k", k)]).unwrap(), Ty::arrow(Ty::Int, Ty::Int));
    }

    #[test]
    fn if_type() {
        assert_eq!(expr_type("if b then 1 else 2", &[("b", Ty::Bool)]).unwrap(), Ty::Int);
    }

    #[test]
    fn unbound_variable_is_located() {
        let e = expr_type("x + y", &[("x", Ty::Int)]).unwrap_err();
        assert_eq!(e.kind, TypeErrorKind::UnboundVariable("y".into()));
        assert_eq!(e.loc, Loc::new(1, 5));
    }

    #[test]
    fn unannotated_lambda_parameter() {
        let e = check_src("let f (y : int) : int = (fun x -> x + y) 1").unwrap_err();
        assert!(matches!(e.kind, TypeErrorKind::AnnotationMissing(_)));
    }

    #[test]
    fn polymorphic_annotation_rejected() {
        let e = check_src("let rec r (l : 'a list) : 'a list = l").unwrap_err();
        assert!(matches!(e.kind, TypeErrorKind::Polymorphic(_)));
    }

    #[test]
    fn arrow_equality_rejected() {
        let e = expr_type("f = f", &[("f", Ty::arrow(Ty::Int, Ty::Int))]).unwrap_err();
        assert!(matches!(e.kind, TypeErrorKind::ArrowEquality(_)));
    }

    #[test]
    fn branch_mismatch() {
        let e = expr_type("if true then 1 else false", &[]).unwrap_err();
        assert!(matches!(e.kind, TypeErrorKind::Mismatch { .. }));
    }

    #[test]
    fn not_a_function() {
        let e = expr_type("3 4", &[]).unwrap_err();
        assert!(matches!(e.kind, TypeErrorKind::NotAFunction(Ty::Int)));
    }

    #[test]
    fn ctor_arity() {
        let e = expr_type("Node (Empty, 1)", &[]).unwrap_err();
        assert!(matches!(e.kind, TypeErrorKind::ConstructorArity { .. }));
    }

    #[test]
    fn untyped_binder_inferred() {
        let t = check_src("(*@ lemma l : forall x. length x >= 0 -> 0 + 1 = 1 *)");
        // `x` is only constrained to be a list of something: unresolved.
        assert!(matches!(t.unwrap_err().kind, TypeErrorKind::Polymorphic(_)));
        let t = check_src("(*@ lemma l : forall j. 0 <= j -> j + 1 > 0 *)").unwrap();
        let TopLevel::Lemma(l) = &t.program.items[0] else { panic!() };
        let Formula::Forall(bs, _) = &l.formula else { panic!() };
        assert_eq!(bs[0].ty, Some(Ty::Int));
    }

    #[test]
    fn pattern_vars_get_types() {
        let t = check_src("let f (l : int list) : int = match l with [] -> 0 | x :: _ -> x").unwrap();
        let d = t.program.def("f").unwrap();
        let ExprKind::Match(_, arms) = &d.body.kind else { panic!() };
        let Pattern::Cons(h, _) = &arms[1].0 else { panic!() };
        assert_eq!(**h, Pattern::Var("x".into(), Some(Ty::Int)));
    }

    #[test]
    fn rec_needs_return_type() {
        let e = check_src("let rec f (x : int) = f x").unwrap_err();
        assert!(matches!(e.kind, TypeErrorKind::AnnotationMissing(_)));
    }

    #[test]
    fn post_meta_types() {
        check_src(
            "let rec h (t : int tree) (k : int -> int) : int = match t with Empty -> k 0 | Node (l, _, _) -> h l k\n\
             (*@ r = h t k ensures post (k : (integer -> integer)) (height t) r *)",
        )
        .unwrap();
        let e = check_src(
            "let g (k : int -> int) : int = k 0 (*@ r = g k ensures post (k : int -> bool) 0 r *)",
        )
        .unwrap_err();
        assert!(matches!(e.kind, TypeErrorKind::Mismatch { .. }));
    }

    #[test]
    fn environment_is_balanced() {
        let p = parse_program("let a (x : int) : int = let y = x in y\nlet b (x : int) : int = a x").unwrap();
        let mut program = normalize_program(&p);
        let mut c = Checker::new(Signature::with_builtins());
        c.declare_types(&program).unwrap();
        for item in program.items.iter_mut() {
            c.check_item(item).unwrap();
        }
        assert_eq!(c.vars.len(), 2);
        assert!(c.vars.values().all(|s| s.len() == 1));
    }
}
