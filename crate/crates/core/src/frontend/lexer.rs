use std::fmt;

use crate::ast::Loc;

use super::ParseError;

/// Reserved words of the code language. Specification keywords
/// (`requires`, `ensures`, `forall`, `post`, ...) are ordinary identifiers
/// that the parser recognizes by context.
pub const KEYWORDS: &[&str] = &[
    "let", "rec", "in", "fun", "match", "with", "if", "then", "else", "type", "of", "true",
    "false", "end", "not",
];

const SYMBOLS: &[&str] = &[
    "->", "::", ";;", "<=", ">=", "<>", "&&", "||", "/\\", "\\/", "(", ")", "[", "]", "{", "}",
    ",", ";", ":", "|", "*", "+", "-", "/", "=", "<", ">", ".", "_",
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Kw(&'static str),
    /// Lowercase identifier.
    Ident(String),
    /// Capitalized identifier (constructor or module-like name).
    UIdent(String),
    /// Type variable `'a`.
    TyVar(String),
    Int(i64),
    Sym(&'static str),
    /// `(*@`
    SpecOpen,
    /// `*)` closing a specification comment.
    SpecClose,
    /// `[@gospel {|`
    AttrOpen,
    /// `|}]`
    AttrClose,
    Eof,
}

impl Tok {
    pub fn lexeme(&self) -> String {
        match self {
            Tok::Kw(k) => k.to_string(),
            Tok::Ident(s) | Tok::UIdent(s) => s.clone(),
            Tok::TyVar(s) => format!("'{s}"),
            Tok::Int(n) => n.to_string(),
            Tok::Sym(s) => s.to_string(),
            Tok::SpecOpen => "(*@".into(),
            Tok::SpecClose => "*)".into(),
            Tok::AttrOpen => "[@gospel {|".into(),
            Tok::AttrClose => "|}]".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Eof => write!(f, "end of input"),
            t => write!(f, "`{}`", t.lexeme()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub loc: Loc,
}

struct Lexer {
    chars: Vec<char>,
    pos: usize,
    line: u32,
    col: u32,
}

impl Lexer {
    fn peek_at(&self, off: usize) -> Option<char> {
        self.chars.get(self.pos + off).copied()
    }

    fn starts_with(&self, s: &str) -> bool {
        s.chars().enumerate().all(|(i, c)| self.peek_at(i) == Some(c))
    }

    fn loc(&self) -> Loc {
        Loc::new(self.line, self.col)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek_at(0)?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn bump_n(&mut self, n: usize) {
        for _ in 0..n {
            self.bump();
        }
    }

    fn err(&self, loc: Loc, msg: impl Into<String>) -> ParseError {
        ParseError::lexical(loc, msg)
    }

    /// Skips a plain comment whose `(*` has already been consumed.
    /// Comments nest.
    fn skip_comment(&mut self, start: Loc) -> Result<(), ParseError> {
        let mut depth = 1;
        while depth > 0 {
            if self.starts_with("(*") {
                self.bump_n(2);
                depth += 1;
            } else if self.starts_with("*)") {
                self.bump_n(2);
                depth -= 1;
            } else if self.bump().is_none() {
                return Err(self.err(start, "unterminated comment"));
            }
        }
        Ok(())
    }

    fn run(mut self) -> Result<Vec<Token>, ParseError> {
        let mut out = Vec::new();
        // Location of the currently open spec comment or attribute, if any.
        let mut in_spec: Option<Loc> = None;
        let mut in_attr: Option<Loc> = None;
        while let Some(c) = self.peek_at(0) {
            let loc = self.loc();
            if c.is_whitespace() {
                self.bump();
                continue;
            }
            if self.starts_with("(*@") && in_spec.is_none() && in_attr.is_none() {
                self.bump_n(3);
                in_spec = Some(loc);
                out.push(Token { tok: Tok::SpecOpen, loc });
                continue;
            }
            if self.starts_with("(*") {
                self.bump_n(2);
                self.skip_comment(loc)?;
                continue;
            }
            if self.starts_with("*)") {
                if in_spec.take().is_some() {
                    self.bump_n(2);
                    out.push(Token { tok: Tok::SpecClose, loc });
                    continue;
                }
                return Err(self.err(loc, "unmatched comment terminator `*)`"));
            }
            if self.starts_with("[@gospel") {
                self.bump_n(8);
                while matches!(self.peek_at(0), Some(c) if c.is_whitespace()) {
                    self.bump();
                }
                if !self.starts_with("{|") {
                    return Err(self.err(self.loc(), "expected `{|` after `[@gospel`"));
                }
                self.bump_n(2);
                in_attr = Some(loc);
                out.push(Token { tok: Tok::AttrOpen, loc });
                continue;
            }
            if self.starts_with("|}") && in_attr.is_some() {
                self.bump_n(2);
                while matches!(self.peek_at(0), Some(c) if c.is_whitespace()) {
                    self.bump();
                }
                if self.peek_at(0) != Some(']') {
                    return Err(self.err(self.loc(), "expected `]` closing the attribute"));
                }
                self.bump();
                in_attr = None;
                out.push(Token { tok: Tok::AttrClose, loc });
                continue;
            }
            if c.is_ascii_digit() {
                let mut s = String::new();
                while let Some(d) = self.peek_at(0).filter(|d| d.is_ascii_digit() || *d == '_') {
                    if d != '_' {
                        s.push(d);
                    }
                    self.bump();
                }
                let n: i64 = s
                    .parse()
                    .map_err(|_| self.err(loc, format!("integer literal `{s}` out of range")))?;
                out.push(Token { tok: Tok::Int(n), loc });
                continue;
            }
            if c == '\'' {
                self.bump();
                let name = self.ident_chars();
                if name.is_empty() {
                    return Err(self.err(loc, "expected a type variable name after `'`"));
                }
                out.push(Token { tok: Tok::TyVar(name), loc });
                continue;
            }
            if c.is_alphabetic() || (c == '_' && self.peek_at(1).is_some_and(is_ident_char)) {
                let name = self.ident_chars();
                let tok = if let Some(k) = KEYWORDS.iter().find(|k| **k == name) {
                    Tok::Kw(k)
                } else if name.starts_with(|c: char| c.is_uppercase()) {
                    Tok::UIdent(name)
                } else {
                    Tok::Ident(name)
                };
                out.push(Token { tok, loc });
                continue;
            }
            if let Some(sym) = SYMBOLS.iter().find(|s| self.starts_with(s)) {
                self.bump_n(sym.chars().count());
                out.push(Token { tok: Tok::Sym(sym), loc });
                continue;
            }
            return Err(self.err(loc, format!("illegal character `{c}`")));
        }
        if let Some(l) = in_spec {
            return Err(self.err(l, "unterminated specification comment"));
        }
        if let Some(l) = in_attr {
            return Err(self.err(l, "unterminated specification attribute"));
        }
        out.push(Token { tok: Tok::Eof, loc: self.loc() });
        Ok(out)
    }

    fn ident_chars(&mut self) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek_at(0).filter(|c| is_ident_char(*c)) {
            s.push(c);
            self.bump();
        }
        s
    }
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

/// Splits source text into tokens. Plain comments are dropped; spec
/// comment and attribute delimiters become single tokens. The result always
/// ends with [`Tok::Eof`].
pub fn tokenize(source: &str) -> Result<Vec<Token>, ParseError> {
    Lexer {
        chars: source.chars().collect(),
        pos: 0,
        line: 1,
        col: 1,
    }
    .run()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).unwrap().into_iter().map(|t| t.tok).filter(|t| *t != Tok::Eof).collect()
    }

    #[test]
    fn simple_let() {
        assert_eq!(
            toks("let x = 1"),
            vec![Tok::Kw("let"), Tok::Ident("x".into()), Tok::Sym("="), Tok::Int(1)]
        );
    }

    #[test]
    fn spec_comment() {
        let t = toks("(*@ r = f x ensures r = x *)");
        assert_eq!(t[0], Tok::SpecOpen);
        assert_eq!(t[1], Tok::Ident("r".into()));
        assert_eq!(*t.last().unwrap(), Tok::SpecClose);
    }

    #[test]
    fn plain_comments_dropped_and_nest() {
        assert_eq!(toks("(* plain comment *) 3"), vec![Tok::Int(3)]);
        assert_eq!(toks("(* a (* b *) c *) 4"), vec![Tok::Int(4)]);
    }

    #[test]
    fn attribute_delimiters() {
        let t = toks("fun [@gospel {| ensures true |}] (x : int) -> x");
        assert_eq!(t[1], Tok::AttrOpen);
        assert_eq!(t[4], Tok::AttrClose);
    }

    #[test]
    fn unterminated_comment_is_located() {
        let e = tokenize("1 (* oops").unwrap_err();
        assert_eq!(e.loc, Loc::new(1, 3));
    }

    #[test]
    fn illegal_character() {
        assert!(tokenize("let x = $").is_err());
    }

    #[test]
    fn connectives() {
        assert_eq!(
            toks("a /\\ b \\/ c -> d"),
            vec![
                Tok::Ident("a".into()),
                Tok::Sym("/\\"),
                Tok::Ident("b".into()),
                Tok::Sym("\\/"),
                Tok::Ident("c".into()),
                Tok::Sym("->"),
                Tok::Ident("d".into())
            ]
        );
    }
}
