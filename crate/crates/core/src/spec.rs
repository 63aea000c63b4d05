//! Translation of specification formulas into the first-order vocabulary:
//! header names become the definition's parameters and `result`, `post`
//! meta-applications become applications of the per-family post
//! predicates, and arrow-typed binders take their continuation type.

use std::collections::{HashMap, HashSet};

use crate::ast::{Binder, Formula, Pattern, Spec, Ty};

/// Access to continuation families while translating formulas.
pub trait Families {
    /// Index of the family for a (source) arrow type, registering it if new.
    fn family_of(&mut self, arrow: &Ty) -> usize;
    fn post_name(&self, family: usize) -> String;
    /// First-order image of a source type.
    fn lower(&mut self, ty: &Ty) -> Ty;
}

/// One step of a `post` expansion: the family whose post relates the
/// step's input to its output, and the intermediate introduced for the
/// output (absent on the last step, whose output is the result term).
#[derive(Clone, Debug, PartialEq)]
pub struct PostStep {
    pub family: usize,
    pub intermediate: Option<(String, Ty)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PostResolution {
    pub arrow_ty: Ty,
    pub chain: Vec<PostStep>,
}

/// Plans the expansion of `post (f : arrow_ty) a1 .. an r`. Intermediate
/// names are `var0, var1, ..` skipping anything in `taken`; chosen names
/// are added to `taken`.
pub fn resolve_post(
    arrow_ty: &Ty,
    nargs: usize,
    fams: &mut dyn Families,
    taken: &mut HashSet<String>,
) -> PostResolution {
    let mut chain = Vec::new();
    let mut cur = arrow_ty.clone();
    let mut counter = 0usize;
    for i in 0..nargs {
        let family = fams.family_of(&cur);
        let Ty::Arrow(_, cod) = cur.clone() else { unreachable!("typing checked the post arity") };
        let intermediate = if i + 1 < nargs {
            let name = loop {
                let candidate = format!("var{counter}");
                counter += 1;
                if !taken.contains(&candidate) {
                    break candidate;
                }
            };
            taken.insert(name.clone());
            Some((name, fams.lower(&cod)))
        } else {
            None
        };
        chain.push(PostStep { family, intermediate });
        cur = *cod;
    }
    PostResolution { arrow_ty: arrow_ty.clone(), chain }
}

/// Expands every `post` meta-application and lowers binder and pattern
/// types. All other structure is preserved.
pub fn expand_post_meta(f: &Formula, fams: &mut dyn Families) -> Formula {
    let mut taken: HashSet<String> = f.all_names().into_iter().collect();
    expand(f, fams, &mut taken)
}

fn expand(f: &Formula, fams: &mut dyn Families, taken: &mut HashSet<String>) -> Formula {
    let mut go = |x: &Formula, fams: &mut dyn Families| expand(x, fams, taken);
    match f {
        Formula::PostMeta { func, fn_ty, args, result } => {
            let func = go(func, fams);
            let args: Vec<Formula> = args.iter().map(|a| go(a, fams)).collect();
            let result = go(result, fams);
            let plan = resolve_post(fn_ty, args.len(), fams, taken);
            build_chain(&plan, func, &args, result, fams)
        }
        Formula::Ctor(c, xs) => Formula::Ctor(c.clone(), xs.iter().map(|x| go(x, fams)).collect()),
        Formula::App(c, xs) => Formula::App(c.clone(), xs.iter().map(|x| go(x, fams)).collect()),
        Formula::Tuple(xs) => Formula::Tuple(xs.iter().map(|x| go(x, fams)).collect()),
        Formula::Bin(op, a, b) => Formula::bin(*op, go(a, fams), go(b, fams)),
        Formula::Un(op, a) => Formula::Un(*op, Box::new(go(a, fams))),
        Formula::Implies(a, b) => Formula::implies(go(a, fams), go(b, fams)),
        Formula::Labeled(l, a) => Formula::Labeled(l.clone(), Box::new(go(a, fams))),
        Formula::Let(x, t, b) => Formula::Let(x.clone(), Box::new(go(t, fams)), Box::new(go(b, fams))),
        Formula::Forall(bs, body) => {
            let bs = bs
                .iter()
                .map(|b| Binder { name: b.name.clone(), ty: b.ty.as_ref().map(|t| fams.lower(t)) })
                .collect();
            Formula::Forall(bs, Box::new(go(body, fams)))
        }
        Formula::Match(s, arms) => {
            let s = go(s, fams);
            let arms = arms.iter().map(|(p, b)| (lower_pattern(p, fams), go(b, fams))).collect();
            Formula::Match(Box::new(s), arms)
        }
        _ => f.clone(),
    }
}

fn build_chain(
    plan: &PostResolution,
    func: Formula,
    args: &[Formula],
    result: Formula,
    fams: &mut dyn Families,
) -> Formula {
    let n = plan.chain.len();
    // input of step i: the function itself, then each intermediate
    let input = |i: usize| -> Formula {
        if i == 0 {
            func.clone()
        } else {
            let (name, _) = plan.chain[i - 1].intermediate.as_ref().expect("non-last step");
            Formula::Var(name.clone())
        }
    };
    let last = &plan.chain[n - 1];
    let mut acc = Formula::app(&fams.post_name(last.family), vec![input(n - 1), args[n - 1].clone(), result]);
    for i in (0..n - 1).rev() {
        let step = &plan.chain[i];
        let (name, ty) = step.intermediate.clone().expect("non-last step");
        let hyp = Formula::app(&fams.post_name(step.family), vec![input(i), args[i].clone(), Formula::Var(name.clone())]);
        acc = Formula::forall(vec![Binder::new(&name, ty)], Formula::implies(hyp, acc));
    }
    acc
}

/// Pattern with every ascribed type lowered.
pub fn lower_pattern(p: &Pattern, fams: &mut dyn Families) -> Pattern {
    match p {
        Pattern::Var(n, t) => Pattern::Var(n.clone(), t.as_ref().map(|t| fams.lower(t))),
        Pattern::Cons(h, t) => Pattern::Cons(Box::new(lower_pattern(h, fams)), Box::new(lower_pattern(t, fams))),
        Pattern::Ctor(c, ps) => Pattern::Ctor(c.clone(), ps.iter().map(|q| lower_pattern(q, fams)).collect()),
        Pattern::Tuple(ps) => Pattern::Tuple(ps.iter().map(|q| lower_pattern(q, fams)).collect()),
        p => p.clone(),
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("specification header names {header} argument(s) but the definition has {actual}")]
pub struct HeaderArityError {
    pub header: usize,
    pub actual: usize,
}

/// The specification with its header removed: header argument names replaced by the
/// definition's parameter names and result names by `result` (a tuple of
/// results is projected with a match on `result`). `ret` is the
/// definition's return type.
pub fn normalize_header(s: &Spec, params: &[String], ret: &Ty) -> Result<Spec, HeaderArityError> {
    let mut args: HashMap<String, Formula> = HashMap::new();
    if s.has_header() {
        if s.arg_names.len() != params.len() {
            return Err(HeaderArityError { header: s.arg_names.len(), actual: params.len() });
        }
        for (h, p) in s.arg_names.iter().zip(params) {
            if h != p {
                args.insert(h.clone(), Formula::var(p));
            }
        }
    }
    let requires = s.requires.iter().map(|f| f.subst(&args)).collect();
    let ensures = s
        .ensures
        .iter()
        .map(|f| match s.result_names.as_slice() {
            [] => f.subst(&args),
            [r] => {
                let mut m = args.clone();
                if r != "result" {
                    m.insert(r.clone(), Formula::var("result"));
                }
                f.subst(&m)
            }
            names => {
                let comps = match ret {
                    Ty::Tuple(ts) if ts.len() == names.len() => ts.clone(),
                    _ => unreachable!("typing checked tuple results"),
                };
                // argument renaming must not touch the names bound by the
                // projection pattern
                let mut m = args.clone();
                for n in names {
                    m.remove(n);
                }
                let pat = Pattern::Tuple(
                    names.iter().zip(comps).map(|(n, t)| Pattern::Var(n.clone(), Some(t))).collect(),
                );
                Formula::Match(Box::new(Formula::var("result")), vec![(pat, f.subst(&m))])
            }
        })
        .collect();
    Ok(Spec { requires, ensures, loc: s.loc, ..Spec::default() })
}

/// Target-vocabulary requires and ensures clauses of a definition spec.
/// `params` are the definition's parameter names and `ret` its source
/// return type.
pub fn translate_spec(
    s: &Spec,
    params: &[String],
    ret: &Ty,
    fams: &mut dyn Families,
) -> Result<(Vec<Formula>, Vec<Formula>), HeaderArityError> {
    let s = normalize_header(s, params, ret)?;
    let requires = s.requires.iter().map(|f| expand_post_meta(f, fams)).collect();
    let ensures = s.ensures.iter().map(|f| expand_post_meta(f, fams)).collect();
    Ok((requires, ensures))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_formula;
    use indexmap::IndexSet;

    /// Families numbered by first request; kont types named `kontN`.
    #[derive(Default)]
    struct Fams(IndexSet<Ty>);

    impl Families for Fams {
        fn family_of(&mut self, arrow: &Ty) -> usize {
            self.0.insert_full(arrow.clone()).0
        }
        fn post_name(&self, family: usize) -> String {
            format!("post{family}")
        }
        fn lower(&mut self, ty: &Ty) -> Ty {
            match ty {
                Ty::Arrow(..) => Ty::named(&format!("kont{}", self.family_of(ty))),
                Ty::Tuple(ts) => Ty::Tuple(ts.iter().map(|t| self.lower(t)).collect()),
                Ty::Named(n, ts) => Ty::Named(n.clone(), ts.iter().map(|t| self.lower(t)).collect()),
                t => t.clone(),
            }
        }
    }

    #[test]
    fn single_argument_post() {
        let f = parse_formula("post (g : int -> int) x r").unwrap();
        let out = expand_post_meta(&f, &mut Fams::default());
        assert_eq!(out, parse_formula("post0 g x r").unwrap());
    }

    #[test]
    fn two_argument_post_chain() {
        let f = parse_formula("post (g : int -> (int -> int)) x y r").unwrap();
        let out = expand_post_meta(&f, &mut Fams::default());
        let want = parse_formula("forall var0 : kont1. post0 g x var0 -> post1 var0 y r").unwrap();
        assert_eq!(out, want);
    }

    #[test]
    fn fresh_name_avoids_existing() {
        let f = parse_formula("forall var0 : int. post (g : int -> int -> int) var0 y r").unwrap();
        let out = expand_post_meta(&f, &mut Fams::default());
        let want = parse_formula("forall var0 : int. forall var1 : kont1. post0 g var0 var1 -> post1 var1 y r").unwrap();
        assert_eq!(out, want);
    }

    #[test]
    fn header_renaming() {
        let spec = Spec {
            result_names: vec!["r".into()],
            fn_name: Some("len".into()),
            arg_names: vec!["m".into()],
            ensures: vec![parse_formula("length m = r").unwrap()],
            ..Spec::default()
        };
        let (req, ens) = translate_spec(&spec, &["l".into()], &Ty::Int, &mut Fams::default()).unwrap();
        assert!(req.is_empty());
        assert_eq!(ens, vec![parse_formula("length l = result").unwrap()]);
    }

    #[test]
    fn tuple_results_project() {
        let spec = Spec {
            result_names: vec!["a".into(), "b".into()],
            fn_name: Some("f".into()),
            arg_names: vec!["x".into()],
            ensures: vec![parse_formula("a = x").unwrap()],
            ..Spec::default()
        };
        let ret = Ty::Tuple(vec![Ty::Int, Ty::Int]);
        let (_, ens) = translate_spec(&spec, &["x".into()], &ret, &mut Fams::default()).unwrap();
        let Formula::Match(s, arms) = &ens[0] else { panic!("{:?}", ens[0]) };
        assert_eq!(**s, Formula::var("result"));
        assert_eq!(arms[0].0.vars(), vec!["a", "b"]);
    }

    #[test]
    fn expansion_is_size_linear() {
        let f = parse_formula("post (g : int -> int -> int -> int) 1 2 3 r /\\ post (h : int -> int) 0 r").unwrap();
        let out = expand_post_meta(&f, &mut Fams::default());
        assert!(out.size() <= f.size() + 4 * 4);
    }
}
