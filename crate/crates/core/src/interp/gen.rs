//! Seeded random values of first-order types.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ast::Ty;
use crate::typing::Signature;

use super::value::Value;

/// Longest generated list.
pub const MAX_LIST_LEN: usize = 20;
/// Most constructor nodes in a generated tree or user data value.
pub const NODE_BUDGET: usize = 20;
/// Generated integers lie in `-INT_RANGE..=INT_RANGE`.
pub const INT_RANGE: i64 = 50;
/// Nesting limit guarding against types with no finite values.
const MAX_DEPTH: usize = 200;

/// Independent generator for trial `trial` of a run seeded with `seed`.
pub fn rng_for(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

pub struct Gen<'s> {
    sig: &'s Signature,
}

impl<'s> Gen<'s> {
    pub fn new(sig: &'s Signature) -> Self {
        Gen { sig }
    }

    /// Whether values of `t` can be generated (no arrows, no type
    /// parameters, only known types).
    pub fn supports(&self, t: &Ty) -> bool {
        match self.sig.expand(t) {
            Ty::Unit | Ty::Int | Ty::Bool => true,
            Ty::Tuple(ts) => ts.iter().all(|t| self.supports(t)),
            Ty::Named(n, args) => {
                self.sig.datatypes.get(&n).is_some_and(|d| d.record.is_none())
                    && !args.iter().any(|a| a.contains_arrow() || a.contains_param())
                    && self.ground_fields(&n, &args)
            }
            _ => false,
        }
    }

    fn ground_fields(&self, n: &str, args: &[Ty]) -> bool {
        let d = &self.sig.datatypes[n];
        d.variants.iter().all(|v| {
            self.sig.ctor_fields(&v.name, args).unwrap_or_default().iter().all(|f| match f {
                Ty::Named(m, _) if m == n => true,
                f => !f.contains_arrow() && !f.contains_param(),
            })
        })
    }

    pub fn value(&self, t: &Ty, rng: &mut impl Rng) -> Option<Value> {
        let budget = rng.gen_range(0..=NODE_BUDGET);
        self.sized(t, budget, rng)
    }

    /// A value of `t` with about `budget` recursive constructor nodes.
    pub fn sized(&self, t: &Ty, budget: usize, rng: &mut impl Rng) -> Option<Value> {
        self.at_depth(t, budget, 0, rng)
    }

    fn at_depth(&self, t: &Ty, budget: usize, depth: usize, rng: &mut impl Rng) -> Option<Value> {
        if depth > MAX_DEPTH {
            return None;
        }
        let small = budget.saturating_sub(1).min(2);
        Some(match self.sig.expand(t) {
            Ty::Unit => Value::Unit,
            Ty::Int => Value::Int(rng.gen_range(-INT_RANGE..=INT_RANGE)),
            Ty::Bool => Value::Bool(rng.gen()),
            Ty::Tuple(ts) => Value::Tuple(ts.iter().map(|t| self.at_depth(t, budget / 2, depth + 1, rng)).collect::<Option<_>>()?),
            Ty::Named(n, args) if n == "list" && args.len() == 1 => {
                let len = rng.gen_range(0..=MAX_LIST_LEN);
                let items = (0..len).map(|_| self.at_depth(&args[0], small, depth + 1, rng)).collect::<Option<Vec<_>>>()?;
                Value::list(items)
            }
            Ty::Named(n, args) => self.data(&n, &args, budget, depth, rng)?,
            Ty::Arrow(..) | Ty::Param(_) => return None,
        })
    }

    fn data(&self, n: &str, args: &[Ty], budget: usize, depth: usize, rng: &mut impl Rng) -> Option<Value> {
        let d = self.sig.datatypes.get(n)?;
        let is_rec = |f: &Ty| matches!(f, Ty::Named(m, _) if m == n);
        let mut leaves = Vec::new();
        let mut nodes = Vec::new();
        for v in &d.variants {
            let fields = self.sig.ctor_fields(&v.name, args)?;
            if fields.iter().any(is_rec) {
                nodes.push((v.name.clone(), fields));
            } else {
                leaves.push((v.name.clone(), fields));
            }
        }
        let pick_node = budget > 0 && !nodes.is_empty() || leaves.is_empty();
        let (name, fields) = if pick_node { nodes.choose(rng)? } else { leaves.choose(rng)? };
        let recs = fields.iter().filter(|f| is_rec(f)).count();
        // Split the remaining budget among the recursive fields.
        let mut shares = vec![0; recs];
        for _ in 0..budget.saturating_sub(1) {
            if recs > 0 {
                shares[rng.gen_range(0..recs)] += 1;
            }
        }
        let mut shares = shares.into_iter();
        let mut vals = Vec::with_capacity(fields.len());
        for f in fields {
            let b = if is_rec(f) { shares.next().unwrap_or(0) } else { budget.saturating_sub(1).min(2) };
            vals.push(self.at_depth(f, b, depth + 1, rng)?);
        }
        Some(Value::Ctor(name.clone(), vals))
    }
}
