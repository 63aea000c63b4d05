//! Invariant walkers over emitted WhyML, independent of the walkers in
//! the library, plus a runner for both sets.

use std::collections::{HashMap, HashSet};

use defun_verify::ast::Ty;
use defun_verify::emit::emit_whyml;
use defun_verify::emit::parse_whyml::parse_whyml;
use defun_verify::emit::whyml::{Decl, Module, Pat, Term, TypeBody};
use defun_verify::Compiled;

fn has_arrow(t: &Ty) -> bool {
    match t {
        Ty::Arrow(..) => true,
        Ty::Named(_, args) | Ty::Tuple(args) => args.iter().any(has_arrow),
        _ => false,
    }
}

fn terms(t: &Term, f: &mut dyn FnMut(&Term)) {
    f(t);
    match t {
        Term::App(_, xs) | Term::Tuple(xs) => xs.iter().for_each(|x| terms(x, f)),
        Term::Bin(_, a, b) | Term::Implies(a, b) | Term::Seq(a, b) | Term::Let(_, a, b) => {
            terms(a, f);
            terms(b, f);
        }
        Term::Not(a) | Term::Neg(a) | Term::Forall(_, a) => terms(a, f),
        Term::Match(s, arms) => {
            terms(s, f);
            arms.iter().for_each(|(_, b)| terms(b, f));
        }
        Term::If(a, b, c) => {
            terms(a, f);
            terms(b, f);
            terms(c, f);
        }
        _ => {}
    }
}

fn pat_vars(p: &Pat) -> Vec<String> {
    match p {
        Pat::Var(x) => vec![x.clone()],
        Pat::Ctor(_, ps) | Pat::Tuple(ps) => ps.iter().flat_map(pat_vars).collect(),
        _ => vec![],
    }
}

fn types_in(m: &Module) -> Vec<Ty> {
    let mut out = Vec::new();
    for d in &m.decls {
        match d {
            Decl::Types(ts) => {
                for t in ts {
                    match &t.body {
                        TypeBody::Variants(cs) => cs.iter().for_each(|(_, fs)| out.extend(fs.iter().cloned())),
                        TypeBody::Record(fs) => out.extend(fs.iter().map(|(_, t)| t.clone())),
                    }
                }
            }
            Decl::Logic(ls) => {
                for l in ls {
                    out.extend(l.params.iter().map(|(_, t)| t.clone()));
                    out.extend(l.ret.clone());
                }
            }
            Decl::Funs { funs, .. } => {
                for f in funs {
                    out.extend(f.params.iter().map(|(_, t)| t.clone()));
                    out.push(f.ret.clone());
                    terms(&f.body, &mut |t| {
                        if let Term::Forall(vs, _) = t {
                            out.extend(vs.iter().map(|(_, t)| t.clone()));
                        }
                    });
                }
            }
            _ => {}
        }
    }
    out
}

/// Continuation types: variant types whose name starts with `kont`.
fn kont_ctors(m: &Module) -> HashMap<String, Vec<String>> {
    let mut out = HashMap::new();
    for d in &m.decls {
        if let Decl::Types(ts) = d {
            for t in ts.iter().filter(|t| t.name.starts_with("kont")) {
                if let TypeBody::Variants(cs) = &t.body {
                    out.insert(t.name.clone(), cs.iter().map(|(c, _)| c.clone()).collect());
                }
            }
        }
    }
    out
}

/// Every function or predicate whose first parameter is a continuation
/// matches on it with exactly one arm per constructor; returns the pattern
/// variables of each constructor's arm, per consumer.
pub fn check_dispatch(m: &Module) -> Result<Vec<HashMap<String, Vec<String>>>, String> {
    let konts = kont_ctors(m);
    let mut consumers = Vec::new();
    for d in &m.decls {
        let mut bodies: Vec<(&str, &Ty, Option<&Term>)> = Vec::new();
        match d {
            Decl::Funs { funs, .. } => {
                bodies.extend(funs.iter().filter_map(|f| f.params.first().map(|(_, t)| (f.name.as_str(), t, Some(&f.body)))))
            }
            Decl::Logic(ls) => bodies.extend(
                ls.iter().filter_map(|l| l.params.first().map(|(_, t)| (l.name.as_str(), t, l.body.as_ref()))),
            ),
            _ => {}
        }
        for (name, ty, body) in bodies {
            let Ty::Named(tn, _) = ty else { continue };
            let Some(ctors) = konts.get(tn) else { continue };
            if !(name.starts_with("apply") || name.starts_with("post")) {
                continue;
            }
            let Some(Term::Match(_, arms)) = body else {
                return Err(format!("{name} does not match on its continuation"));
            };
            let mut seen = HashMap::new();
            for (p, _) in arms {
                let Pat::Ctor(c, _) = p else { return Err(format!("{name}: non-constructor arm {p:?}")) };
                if seen.insert(c.clone(), pat_vars(p)).is_some() {
                    return Err(format!("{name}: constructor {c} matched twice"));
                }
            }
            let got: HashSet<&String> = seen.keys().collect();
            let want: HashSet<&String> = ctors.iter().collect();
            if got != want {
                return Err(format!("{name}: arms {got:?}, type {tn} has {want:?}"));
            }
            consumers.push(seen);
        }
    }
    if consumers.len() != 2 * konts.len() {
        return Err(format!("{} continuation types but {} apply/post definitions", konts.len(), consumers.len()));
    }
    Ok(consumers)
}

/// No arrow types, and every application head is a global name rather than
/// a bound variable.
pub fn check_first_order(m: &Module) -> Result<(), String> {
    if let Some(t) = types_in(m).iter().find(|t| has_arrow(t)) {
        return Err(format!("arrow type {t}"));
    }
    for d in &m.decls {
        if let Decl::Funs { funs, .. } = d {
            for f in funs {
                let params: HashSet<&String> = f.params.iter().map(|(n, _)| n).collect();
                let mut bad = None;
                terms(&f.body, &mut |t| {
                    if let Term::App(h, _) = t {
                        if params.contains(h) {
                            bad = Some(h.clone());
                        }
                    }
                });
                if let Some(h) = bad {
                    return Err(format!("{}: parameter {h} is applied", f.name));
                }
            }
        }
    }
    Ok(())
}

/// Each lambda constructor is built from variables named exactly as the
/// apply and post arms bind its fields.
pub fn check_captures(c: &Compiled, m: &Module, consumers: &[HashMap<String, Vec<String>>]) -> Result<(), String> {
    let lambda_ctors: HashSet<&str> =
        c.target.sites.iter().filter(|s| s.eta_of.is_none()).map(|s| s.ctor.as_str()).collect();
    for d in &m.decls {
        let Decl::Funs { funs, .. } = d else { continue };
        for f in funs {
            let mut res = Ok(());
            terms(&f.body, &mut |t| {
                let (ctor, args) = match t {
                    Term::App(c, args) => (c.as_str(), args.as_slice()),
                    Term::Var(c) => (c.as_str(), &[][..]),
                    _ => return,
                };
                if !lambda_ctors.contains(ctor) {
                    return;
                }
                let names: Vec<String> = args
                    .iter()
                    .map(|a| match a {
                        Term::Var(x) => x.clone(),
                        other => format!("<{other:?}>"),
                    })
                    .collect();
                for arms in consumers {
                    if let Some(bound) = arms.get(ctor) {
                        if *bound != names {
                            res = Err(format!("{}: {ctor} built from {names:?}, arm binds {bound:?}", f.name));
                        }
                    }
                }
            });
            res?;
        }
    }
    Ok(())
}

/// Runs the library walkers and the ones above.
pub fn check_all(c: &Compiled) -> Result<(), String> {
    c.target.check_first_order()?;
    c.target.check_families()?;
    c.target.check_captures()?;
    let text = emit_whyml(&c.target);
    let m = parse_whyml(&text).map_err(|e| e.to_string())?;
    check_first_order(&m)?;
    let consumers = check_dispatch(&m)?;
    check_captures(c, &m, &consumers)
}
