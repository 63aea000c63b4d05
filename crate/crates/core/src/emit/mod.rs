//! Text output: WhyML for the first-order program and canonical surface
//! syntax for source programs.

pub mod alpha;
pub mod parse_whyml;
pub mod surface;
pub mod whyml;

use crate::defunc::TargetProgram;

pub use surface::emit_surface;

/// Logical built-ins and the WhyML standard-library module providing each:
/// (source symbol, module, WhyML name).
pub const STDLIB: &[(&str, &str, &str)] = &[
    ("int", "int.Int", "int"),
    ("max", "int.MinMax", "max"),
    ("min", "int.MinMax", "min"),
    ("abs", "int.Abs", "abs"),
    ("/", "int.ComputerDivision", "div"),
    ("list", "list.List", "list"),
    ("length", "list.Length", "length"),
    ("tree", "bintree.Tree", "tree"),
    ("height", "bintree.Height", "height"),
];

/// Identifiers reserved by WhyML; user names equal to one of these are
/// emitted with a trailing `_`.
pub const WHYML_KEYWORDS: &[&str] = &[
    "abstract", "absurd", "alias", "any", "as", "assert", "assume", "at", "axiom", "begin", "break",
    "by", "check", "clone", "coinductive", "constant", "continue", "diverges", "do", "done",
    "downto", "else", "end", "ensures", "epsilon", "exception", "exists", "export", "false", "float",
    "for", "forall", "fun", "function", "ghost", "goal", "if", "import", "in", "inductive", "invariant",
    "label", "lemma", "let", "match", "meta", "module", "mutable", "not", "old", "partial",
    "predicate", "private", "pure", "raise", "raises", "range", "reads", "rec", "ref", "requires",
    "return", "returns", "scope", "so", "then", "theory", "to", "true", "try", "type", "use", "val",
    "variant", "while", "with", "writes",
];

pub fn emit_whyml(t: &TargetProgram) -> String {
    whyml::print_module(&whyml::to_module(t))
}
