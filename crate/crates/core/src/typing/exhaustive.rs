//! Match exhaustiveness via pattern-matrix usefulness.

use crate::ast::{Pattern, Ty};

use super::Signature;

/// Patterns reduced to constructor applications. Tuples and unit are
/// single-constructor types; list sugar maps onto `Nil`/`Cons`.
#[derive(Clone, Debug, PartialEq)]
enum Pat {
    Any,
    Ctor(String, Vec<Pat>),
    Int(i64),
}

const TUPLE: &str = "(,)";
const UNIT: &str = "()";

fn lower(p: &Pattern) -> Pat {
    match p {
        Pattern::Wildcard | Pattern::Var(..) => Pat::Any,
        Pattern::Int(n) => Pat::Int(*n),
        Pattern::Nil => Pat::Ctor("Nil".into(), vec![]),
        Pattern::Cons(h, t) => Pat::Ctor("Cons".into(), vec![lower(h), lower(t)]),
        Pattern::Ctor(c, ps) => Pat::Ctor(c.clone(), ps.iter().map(lower).collect()),
        Pattern::Tuple(ps) if ps.is_empty() => Pat::Ctor(UNIT.into(), vec![]),
        Pattern::Tuple(ps) => Pat::Ctor(TUPLE.into(), ps.iter().map(lower).collect()),
    }
}

/// Constructors of `ty` with their field types, or `None` for types with
/// infinitely many values (`int`) or no pattern-matchable shape.
fn signature_of(sig: &Signature, ty: &Ty) -> Option<Vec<(String, Vec<Ty>)>> {
    match ty {
        Ty::Unit => Some(vec![(UNIT.into(), vec![])]),
        Ty::Tuple(ts) => Some(vec![(TUPLE.into(), ts.clone())]),
        Ty::Named(n, args) => {
            let vs = sig.ctors_of(n)?;
            Some(
                vs.iter()
                    .map(|v| (v.name.clone(), sig.ctor_fields(&v.name, args).expect("declared ctor")))
                    .collect(),
            )
        }
        _ => None,
    }
}

fn ctor_fields(sig: &Signature, ty: &Ty, c: &str, arity: usize) -> Vec<Ty> {
    signature_of(sig, ty)
        .and_then(|cs| cs.into_iter().find(|(n, _)| n == c).map(|(_, f)| f))
        .unwrap_or_else(|| vec![Ty::Unit; arity])
}

/// Rows whose head matches constructor `c` (or literal), with the head
/// replaced by its sub-patterns.
fn specialize(rows: &[Vec<Pat>], head: &Pat, arity: usize) -> Vec<Vec<Pat>> {
    rows.iter()
        .filter_map(|row| {
            let rest = &row[1..];
            let mut out: Vec<Pat> = match (&row[0], head) {
                (Pat::Any, _) => vec![Pat::Any; arity],
                (Pat::Ctor(c, ps), Pat::Ctor(d, _)) if c == d => ps.clone(),
                (Pat::Int(n), Pat::Int(m)) if n == m => vec![],
                _ => return None,
            };
            out.extend_from_slice(rest);
            Some(out)
        })
        .collect()
}

fn default_rows(rows: &[Vec<Pat>]) -> Vec<Vec<Pat>> {
    rows.iter().filter(|r| r[0] == Pat::Any).map(|r| r[1..].to_vec()).collect()
}

/// Whether some value matched by `q` escapes every row of `rows`.
fn useful(sig: &Signature, rows: &[Vec<Pat>], q: &[Pat], tys: &[Ty]) -> bool {
    if q.is_empty() {
        return rows.is_empty();
    }
    let ty = &tys[0];
    match &q[0] {
        Pat::Ctor(c, args) => {
            let fields = ctor_fields(sig, ty, c, args.len());
            let mut q2 = args.clone();
            q2.extend_from_slice(&q[1..]);
            let mut t2 = fields;
            t2.extend_from_slice(&tys[1..]);
            useful(sig, &specialize(rows, &q[0], args.len()), &q2, &t2)
        }
        Pat::Int(_) => useful(sig, &specialize(rows, &q[0], 0), &q[1..], &tys[1..]),
        Pat::Any => {
            let heads: Vec<&str> = rows
                .iter()
                .filter_map(|r| match &r[0] {
                    Pat::Ctor(c, _) => Some(c.as_str()),
                    _ => None,
                })
                .collect();
            match signature_of(sig, ty) {
                Some(cs) if !cs.is_empty() && cs.iter().all(|(c, _)| heads.contains(&c.as_str())) => {
                    cs.into_iter().any(|(c, fields)| {
                        let n = fields.len();
                        let head = Pat::Ctor(c, vec![Pat::Any; n]);
                        let mut q2 = vec![Pat::Any; n];
                        q2.extend_from_slice(&q[1..]);
                        let mut t2 = fields;
                        t2.extend_from_slice(&tys[1..]);
                        useful(sig, &specialize(rows, &head, n), &q2, &t2)
                    })
                }
                _ => useful(sig, &default_rows(rows), &q[1..], &tys[1..]),
            }
        }
    }
}

/// True when every value of type `ty` matches one of `patterns`.
pub fn is_exhaustive(sig: &Signature, ty: &Ty, patterns: &[&Pattern]) -> bool {
    let rows: Vec<Vec<Pat>> = patterns.iter().map(|p| vec![lower(p)]).collect();
    !useful(sig, &rows, &[Pat::Any], std::slice::from_ref(ty))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::Ty;

    fn pats(ps: &[Pattern]) -> Vec<&Pattern> {
        ps.iter().collect()
    }

    #[test]
    fn list_patterns() {
        let s = Signature::with_builtins();
        let l = Ty::list(Ty::Int);
        let full = [Pattern::Nil, Pattern::Cons(Box::new(Pattern::Wildcard), Box::new(Pattern::Wildcard))];
        assert!(is_exhaustive(&s, &l, &pats(&full)));
        assert!(!is_exhaustive(&s, &l, &pats(&full[1..])));
    }

    #[test]
    fn nested_ctor_missing_case() {
        let mut s = Signature::with_builtins();
        s.add_datatype(super::super::DataType {
            name: "exp".into(),
            params: vec![],
            variants: vec![
                crate::ast::Variant { name: "Const".into(), fields: vec![Ty::Int] },
                crate::ast::Variant {
                    name: "Sub".into(),
                    fields: vec![Ty::Tuple(vec![Ty::named("exp"), Ty::named("exp")])],
                },
            ],
            record: None,
            builtin: false,
        });
        let c = |p| Pattern::Ctor("Const".into(), vec![p]);
        let sub = Pattern::Ctor("Sub".into(), vec![Pattern::Tuple(vec![c(Pattern::Wildcard), c(Pattern::Wildcard)])]);
        let e = Ty::named("exp");
        assert!(!is_exhaustive(&s, &e, &[&sub]));
        let any_const = c(Pattern::Wildcard);
        let any_sub = Pattern::Ctor("Sub".into(), vec![Pattern::Wildcard]);
        assert!(is_exhaustive(&s, &e, &[&any_const, &any_sub]));
    }

    #[test]
    fn ints_need_a_default() {
        let s = Signature::with_builtins();
        assert!(!is_exhaustive(&s, &Ty::Int, &[&Pattern::Int(0)]));
        assert!(is_exhaustive(&s, &Ty::Int, &[&Pattern::Int(0), &Pattern::Wildcard]));
    }
}
