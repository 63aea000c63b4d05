//! Differential testing of a program against its defunctionalized form.

use std::fmt;

use crate::ast::Ty;
use crate::Compiled;

use super::gen::{rng_for, Gen};
use super::logic::Logic;
use super::value::Value;
use super::{eval_fo, eval_ho, RunErrorKind, RunResult};

/// Samples drawn per trial before giving up on satisfying `requires`.
const MAX_RESAMPLES: usize = 50;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum EquivError {
    #[error("no definition `{0}`")]
    UnknownEntry(String),
    #[error("`{0}` is missing from the translated program")]
    MissingInTarget(String),
    #[error("cannot generate values for parameter `{name}` of type {ty}")]
    Ungeneratable { name: String, ty: Ty },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Counterexample {
    pub trial: u64,
    pub args: Vec<Value>,
    pub ho: RunResult<Value>,
    pub fo: RunResult<Value>,
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |r: &RunResult<Value>| match r {
            Ok(v) => v.to_string(),
            Err(e) => format!("error: {e}"),
        };
        let args: Vec<String> = self.args.iter().map(Value::to_string).collect();
        write!(
            f,
            "trial {}: args [{}]: source gives {}, target gives {}",
            self.trial,
            args.join(", "),
            show(&self.ho),
            show(&self.fo)
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EquivReport {
    pub trials: u64,
    /// Trials where both sides returned equal values or failed the same way.
    pub agreed: u64,
    /// Trials where a side ran out of fuel or returned a function.
    pub inconclusive: u64,
    /// Trials with no input satisfying the precondition.
    pub filtered: u64,
    /// Trials where the entry's postconditions could be evaluated.
    pub ensures_checked: u64,
    /// Those among them where a postcondition was false.
    pub ensures_failed: u64,
    pub counterexample: Option<Counterexample>,
}

impl EquivReport {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none() && self.ensures_failed == 0
    }
}

enum Verdict {
    Agree,
    Inconclusive,
    Differ,
}

fn compare(ho: &RunResult<Value>, fo: &RunResult<Value>) -> Verdict {
    let fuel = |r: &RunResult<Value>| matches!(r, Err(e) if e.kind == RunErrorKind::FuelExhausted);
    if fuel(ho) || fuel(fo) {
        return Verdict::Inconclusive;
    }
    match (ho, fo) {
        (Ok(a), _) if a.contains_closure() => Verdict::Inconclusive,
        (Ok(a), Ok(b)) if a == b => Verdict::Agree,
        (Err(a), Err(b)) if a.kind.same_kind(&b.kind) => Verdict::Agree,
        _ => Verdict::Differ,
    }
}

/// Runs `entry` on `trials` seeded random inputs through both evaluators,
/// stopping at the first disagreement.
pub fn equiv_check(c: &Compiled, entry: &str, seed: u64, trials: u64, fuel: u64) -> Result<EquivReport, EquivError> {
    let def = c.typed.program.def(entry).ok_or_else(|| EquivError::UnknownEntry(entry.into()))?;
    if c.target.function(entry).is_none() {
        return Err(EquivError::MissingInTarget(entry.into()));
    }
    let gen = Gen::new(&c.typed.sig);
    let mut params = Vec::new();
    for p in &def.params {
        let ty = p.ty.clone().expect("checked");
        if !gen.supports(&ty) {
            return Err(EquivError::Ungeneratable { name: p.name.clone(), ty });
        }
        params.push((p.name.clone(), ty));
    }
    let spec = def.spec.as_ref();
    let requires = spec.map(|s| s.requires.as_slice()).unwrap_or(&[]);
    let ensures = spec.map(|s| s.ensures.as_slice()).unwrap_or(&[]);
    let arg_names: Vec<String> = match spec {
        Some(s) if s.has_header() => s.arg_names.clone(),
        _ => params.iter().map(|(x, _)| x.clone()).collect(),
    };
    let result_names: Vec<String> = spec.map(|s| s.result_names.clone()).unwrap_or_default();
    let mut logic = Logic::new(&c.typed.program.prelude);
    let mut report = EquivReport { trials, ..Default::default() };

    for trial in 0..trials {
        let mut rng = rng_for(seed, trial);
        let mut chosen = None;
        for _ in 0..MAX_RESAMPLES {
            let args: Option<Vec<Value>> = params.iter().map(|(_, t)| gen.value(t, &mut rng)).collect();
            let Some(args) = args else { continue };
            let mut env: Vec<(String, Value)> = arg_names.iter().cloned().zip(args.iter().cloned()).collect();
            if requires.iter().all(|r| logic.holds(r, &mut env) != Some(false)) {
                chosen = Some(args);
                break;
            }
        }
        let Some(args) = chosen else {
            report.filtered += 1;
            continue;
        };
        let ho = eval_ho(&c.typed, entry, &args, fuel);
        let fo = eval_fo(&c.target, entry, &args, fuel);
        match compare(&ho, &fo) {
            Verdict::Agree => report.agreed += 1,
            Verdict::Inconclusive => {
                report.inconclusive += 1;
                continue;
            }
            Verdict::Differ => {
                report.counterexample = Some(Counterexample { trial, args, ho, fo });
                break;
            }
        }
        let Ok(v) = &ho else { continue };
        if ensures.is_empty() {
            continue;
        }
        let mut env: Vec<(String, Value)> = arg_names.iter().cloned().zip(args.iter().cloned()).collect();
        env.push(("result".into(), v.clone()));
        match (result_names.as_slice(), v) {
            ([r], v) => env.push((r.clone(), v.clone())),
            (rs, Value::Tuple(xs)) if rs.len() == xs.len() => env.extend(rs.iter().cloned().zip(xs.iter().cloned())),
            _ => {}
        }
        let verdicts: Vec<Option<bool>> = ensures.iter().map(|e| logic.holds(e, &mut env)).collect();
        if verdicts.iter().any(|v| v.is_some()) {
            report.ensures_checked += 1;
            if verdicts.contains(&Some(false)) {
                report.ensures_failed += 1;
            }
        }
    }
    Ok(report)
}
