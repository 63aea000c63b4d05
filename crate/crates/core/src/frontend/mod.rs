//! Lexing and parsing of `.mlg` sources: code, trailing `(*@ ... *)`
//! specification blocks and `[@gospel {| ... |}]` lambda attributes.

mod lexer;
mod parser;

use std::fmt;

use crate::ast::{Expr, Formula, Loc, Program, Ty};

pub use lexer::{tokenize, Tok, Token, KEYWORDS};
pub use parser::Parser;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub loc: Loc,
    /// Alternatives the parser would have accepted. Empty for lexical errors
    /// and for errors carrying a `message` instead.
    pub expected: Vec<String>,
    pub found: String,
    pub message: Option<String>,
}

impl ParseError {
    pub fn lexical(loc: Loc, msg: impl Into<String>) -> Self {
        ParseError { loc, expected: vec![], found: String::new(), message: Some(msg.into()) }
    }

    pub fn unexpected(loc: Loc, expected: &[&str], found: &Tok) -> Self {
        ParseError {
            loc,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: found.to_string(),
            message: None,
        }
    }

    pub fn custom(loc: Loc, found: &Tok, msg: impl Into<String>) -> Self {
        ParseError { loc, expected: vec![], found: found.to_string(), message: Some(msg.into()) }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.loc)?;
        if let Some(m) = &self.message {
            return write!(f, "{m}");
        }
        match self.expected.as_slice() {
            [] => write!(f, "unexpected {}", self.found),
            [one] => write!(f, "expected {one}, found {}", self.found),
            many => write!(f, "expected one of {}, found {}", many.join(", "), self.found),
        }
    }
}

pub fn parse_program(source: &str) -> Result<Program, ParseError> {
    Parser::new(tokenize(source)?).program()
}

/// Parses a single expression (used for command-line argument literals).
pub fn parse_expr(source: &str) -> Result<Expr, ParseError> {
    let mut p = Parser::new(tokenize(source)?);
    let e = p.expr()?;
    p.expect_eof()?;
    Ok(e)
}

/// Parses one specification formula.
pub fn parse_formula(source: &str) -> Result<Formula, ParseError> {
    let mut p = Parser::new(tokenize(source)?);
    let f = p.formula()?;
    p.expect_eof()?;
    Ok(f)
}

pub fn parse_type(source: &str) -> Result<Ty, ParseError> {
    let mut p = Parser::new(tokenize(source)?);
    let t = p.ty()?;
    p.expect_eof()?;
    Ok(t)
}
