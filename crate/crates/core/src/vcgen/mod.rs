//! Verification conditions for first-order target programs, by weakest
//! preconditions, rendered as SMT-LIB2.

pub mod smt;
pub mod solver;
pub mod term;
pub mod wp;

pub use smt::{emit_smt, parse_expectations};
pub use solver::{run_solver, solver_path, Answer};
pub use term::{Term, VcKind};
pub use wp::{generate_vcs, Vc};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum VcError {
    #[error("unsupported in verification conditions: {0}")]
    Unsupported(String),
    #[error("ill-typed specification: {0}")]
    Type(String),
    /// A polymorphic constructor whose instance is not determined locally.
    #[error("cannot determine the type of `{0}`")]
    NeedType(String),
}
