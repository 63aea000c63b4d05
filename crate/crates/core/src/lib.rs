//! Defunctionalizing translator for annotated higher-order ML programs.
//!
//! The pipeline parses a `.mlg` source ([`frontend`]), type-checks it
//! ([`typing`]), replaces every first-class function by a constructor of a
//! per-type continuation datatype ([`defunc`], with specifications handled
//! by [`spec`]), and prints the first-order result as WhyML ([`emit`]) or as
//! SMT-LIB verification conditions ([`vcgen`]). Two reference interpreters
//! ([`interp`]) check that the translation preserves behavior.

pub mod ast;
pub mod cli;
pub mod defunc;
pub mod emit;
pub mod frontend;
pub mod interp;
pub mod spec;
pub mod typing;
pub mod vcgen;

use defunc::{DefuncError, TargetProgram};
use frontend::ParseError;
use typing::{TypeError, TypedProgram};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
    #[error("type error: {0}")]
    Type(#[from] TypeError),
    #[error("defunctionalization error: {0}")]
    Defunc(#[from] DefuncError),
    #[error("verification condition error: {0}")]
    Vc(#[from] vcgen::VcError),
}

impl Error {
    /// The message without the stage prefix, starting with `line:col` when
    /// the error has a location.
    pub fn detail(&self) -> String {
        match self {
            Error::Parse(e) => e.to_string(),
            Error::Type(e) => e.to_string(),
            Error::Defunc(e) => e.to_string(),
            Error::Vc(e) => e.to_string(),
        }
    }
}

/// A program carried through every front-end stage.
#[derive(Debug, Clone)]
pub struct Compiled {
    pub typed: TypedProgram,
    pub target: TargetProgram,
}

/// Parses and type-checks `source`.
pub fn check_source(source: &str) -> Result<TypedProgram, Error> {
    let program = frontend::parse_program(source)?;
    Ok(typing::check_program(&program)?)
}

/// Parses, type-checks and defunctionalizes `source`.
pub fn compile(source: &str) -> Result<Compiled, Error> {
    let typed = check_source(source)?;
    let target = defunc::defunctionalize(&typed)?;
    Ok(Compiled { typed, target })
}

/// Verification conditions of a compiled program with one SMT-LIB script
/// each.
pub fn verification_conditions(c: &Compiled) -> Result<Vec<(vcgen::Vc, String)>, Error> {
    let vcs = vcgen::generate_vcs(&c.target)?;
    let scripts = vcgen::emit_smt(&vcs, &c.target)?;
    Ok(vcs.into_iter().zip(scripts.into_iter().map(|(_, s)| s)).collect())
}

/// The entry point named by a `(* entry: NAME *)` comment, if any.
pub fn entry_pragma(source: &str) -> Option<String> {
    let i = source.find("(* entry:")?;
    let rest = &source[i + "(* entry:".len()..];
    let end = rest.find("*)")?;
    let name = rest[..end].trim();
    (!name.is_empty()).then(|| name.to_string())
}
