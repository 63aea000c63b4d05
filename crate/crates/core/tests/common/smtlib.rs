//! A small SMT-LIB2 checker written separately from the emitter: it reads
//! S-expressions, checks the shape of each command and that every symbol
//! in a term is bound, declared or a core/integer theory operator.

use std::collections::{HashMap, HashSet};

#[derive(Clone, Debug, PartialEq)]
pub enum Sx {
    Atom(String),
    List(Vec<Sx>),
}

fn tokens(text: &str) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            ';' => {
                while chars.peek().is_some_and(|&c| c != '\n') {
                    chars.next();
                }
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            '(' | ')' => {
                out.push(c.to_string());
                chars.next();
            }
            '|' => {
                chars.next();
                let mut s = String::from("|");
                loop {
                    match chars.next() {
                        Some('|') => break,
                        Some('\\') => return Err("backslash in quoted symbol".into()),
                        Some(c) => s.push(c),
                        None => return Err("unterminated quoted symbol".into()),
                    }
                }
                s.push('|');
                out.push(s);
            }
            '"' => {
                chars.next();
                let mut s = String::from("\"");
                loop {
                    match chars.next() {
                        Some('"') if chars.peek() == Some(&'"') => {
                            chars.next();
                            s.push_str("\"\"");
                        }
                        Some('"') => break,
                        Some(c) => s.push(c),
                        None => return Err("unterminated string".into()),
                    }
                }
                s.push('"');
                out.push(s);
            }
            _ => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || "()|\";".contains(c) {
                        break;
                    }
                    s.push(c);
                    chars.next();
                }
                out.push(s);
            }
        }
    }
    Ok(out)
}

pub fn parse(text: &str) -> Result<Vec<Sx>, String> {
    let toks = tokens(text)?;
    let mut stack: Vec<Vec<Sx>> = vec![Vec::new()];
    for t in toks {
        match t.as_str() {
            "(" => stack.push(Vec::new()),
            ")" => {
                let done = stack.pop().unwrap();
                stack.last_mut().ok_or("unbalanced `)`")?.push(Sx::List(done));
            }
            _ => stack.last_mut().unwrap().push(Sx::Atom(t)),
        }
        if stack.is_empty() {
            return Err("unbalanced `)`".into());
        }
    }
    if stack.len() != 1 {
        return Err("unbalanced `(`".into());
    }
    Ok(stack.pop().unwrap())
}

const SIMPLE_EXTRA: &str = "~!@$%^&*_-+=<>.?/";

fn is_symbol(s: &str) -> bool {
    if s.len() >= 2 && s.starts_with('|') && s.ends_with('|') {
        return true;
    }
    let mut cs = s.chars();
    match cs.next() {
        Some(c) if c.is_ascii_alphabetic() || SIMPLE_EXTRA.contains(c) => {}
        _ => return false,
    }
    s.chars().all(|c| c.is_ascii_alphanumeric() || SIMPLE_EXTRA.contains(c))
}

fn is_numeral(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_digit()) && (s == "0" || !s.starts_with('0'))
}

const RESERVED: [&str; 14] = [
    "let", "forall", "exists", "match", "par", "as", "_", "!", "assert", "check-sat", "declare-fun",
    "define-fun", "NUMERAL", "DECIMAL",
];

const THEORY: [&str; 18] =
    ["true", "false", "not", "and", "or", "=>", "xor", "=", "distinct", "ite", "+", "-", "*", "div", "mod", "abs", "<=", "<"];
const THEORY_MORE: [&str; 2] = [">=", ">"];

#[derive(Default)]
struct Scope {
    sorts: HashSet<String>,
    funs: HashSet<String>,
    ctors: HashSet<String>,
}

fn atom(s: &Sx) -> Result<&str, String> {
    match s {
        Sx::Atom(a) => Ok(a),
        Sx::List(_) => Err(format!("expected an atom, found {s:?}")),
    }
}

fn list(s: &Sx) -> Result<&[Sx], String> {
    match s {
        Sx::List(xs) => Ok(xs),
        Sx::Atom(a) => Err(format!("expected a list, found `{a}`")),
    }
}

fn symbol(s: &Sx) -> Result<String, String> {
    let a = atom(s)?;
    if is_symbol(a) && !RESERVED.contains(&a) {
        Ok(a.to_string())
    } else {
        Err(format!("`{a}` is not a symbol"))
    }
}

impl Scope {
    fn sort(&self, s: &Sx) -> Result<(), String> {
        let a = atom(s)?;
        if a == "Int" || a == "Bool" || self.sorts.contains(a) {
            Ok(())
        } else {
            Err(format!("unknown sort `{a}`"))
        }
    }

    fn sorted_vars(&self, s: &Sx) -> Result<Vec<String>, String> {
        let mut names = Vec::new();
        for v in list(s)? {
            match list(v)? {
                [n, t] => {
                    self.sort(t)?;
                    names.push(symbol(n)?);
                }
                _ => return Err("malformed sorted variable".into()),
            }
        }
        Ok(names)
    }

    fn known(&self, a: &str, bound: &[String]) -> bool {
        bound.iter().any(|b| b == a)
            || self.funs.contains(a)
            || self.ctors.contains(a)
            || THEORY.contains(&a)
            || THEORY_MORE.contains(&a)
    }

    fn term(&self, t: &Sx, bound: &mut Vec<String>) -> Result<(), String> {
        match t {
            Sx::Atom(a) if is_numeral(a) => Ok(()),
            Sx::Atom(a) => {
                symbol(t)?;
                if self.known(a, bound) {
                    Ok(())
                } else {
                    Err(format!("unbound symbol `{a}`"))
                }
            }
            Sx::List(xs) => {
                let (head, args) = xs.split_first().ok_or("empty application")?;
                match head {
                    Sx::Atom(h) if h == "let" => {
                        let [binds, body] = args else { return Err("malformed let".into()) };
                        let mut names = Vec::new();
                        for b in list(binds)? {
                            let [n, v] = list(b)? else { return Err("malformed let binding".into()) };
                            self.term(v, bound)?;
                            names.push(symbol(n)?);
                        }
                        if names.is_empty() {
                            return Err("empty let".into());
                        }
                        let depth = bound.len();
                        bound.extend(names);
                        self.term(body, bound)?;
                        bound.truncate(depth);
                        Ok(())
                    }
                    Sx::Atom(h) if h == "forall" || h == "exists" => {
                        let [vars, body] = args else { return Err(format!("malformed {h}")) };
                        let names = self.sorted_vars(vars)?;
                        if names.is_empty() {
                            return Err(format!("{h} binds nothing"));
                        }
                        let depth = bound.len();
                        bound.extend(names);
                        self.term(body, bound)?;
                        bound.truncate(depth);
                        Ok(())
                    }
                    Sx::Atom(h) if h == "!" => {
                        let [body, rest @ ..] = args else { return Err("malformed `!`".into()) };
                        if rest.is_empty() || rest.len() % 2 != 0 {
                            return Err("`!` needs attribute/value pairs".into());
                        }
                        for pair in rest.chunks(2) {
                            if !atom(&pair[0])?.starts_with(':') {
                                return Err("attribute must be a keyword".into());
                            }
                        }
                        self.term(body, bound)
                    }
                    Sx::List(q) => {
                        match q.as_slice() {
                            [Sx::Atom(u), Sx::Atom(is), c] if u == "_" && is == "is" => {
                                let c = atom(c)?;
                                if !self.ctors.contains(c) {
                                    return Err(format!("tester for unknown constructor `{c}`"));
                                }
                            }
                            _ => return Err(format!("unsupported indexed identifier {q:?}")),
                        }
                        let [arg] = args else { return Err("tester takes one argument".into()) };
                        self.term(arg, bound)
                    }
                    Sx::Atom(h) => {
                        symbol(head)?;
                        if !self.known(h, bound) {
                            return Err(format!("unbound function `{h}`"));
                        }
                        if args.is_empty() {
                            return Err(format!("`({h})` applies nothing"));
                        }
                        args.iter().try_for_each(|a| self.term(a, bound))
                    }
                }
            }
        }
    }

    fn command(&mut self, c: &Sx) -> Result<(), String> {
        let xs = list(c)?;
        let (head, args) = xs.split_first().ok_or("empty command")?;
        match atom(head)? {
            "set-logic" => {
                let [l] = args else { return Err("set-logic takes one symbol".into()) };
                symbol(l).map(drop)
            }
            "set-option" | "set-info" => match args {
                [k, _] if atom(k)?.starts_with(':') => Ok(()),
                _ => Err("malformed option".into()),
            },
            "declare-datatypes" => {
                let [heads, bodies] = args else { return Err("malformed declare-datatypes".into()) };
                let heads = list(heads)?;
                let bodies = list(bodies)?;
                if heads.len() != bodies.len() || heads.is_empty() {
                    return Err("datatype heads and bodies differ in number".into());
                }
                for h in heads {
                    let [n, arity] = list(h)? else { return Err("malformed datatype head".into()) };
                    if atom(arity)? != "0" {
                        return Err("only arity 0 is expected".into());
                    }
                    if !self.sorts.insert(symbol(n)?) {
                        return Err("sort declared twice".into());
                    }
                }
                for b in bodies {
                    let ctors = list(b)?;
                    if ctors.is_empty() {
                        return Err("datatype without constructors".into());
                    }
                    for c in ctors {
                        let (name, fields) = match c {
                            Sx::List(cs) if !cs.is_empty() => (symbol(&cs[0])?, &cs[1..]),
                            _ => return Err("malformed constructor".into()),
                        };
                        if !self.ctors.insert(name) {
                            return Err("constructor declared twice".into());
                        }
                        for f in fields {
                            let [sel, s] = list(f)? else { return Err("malformed selector".into()) };
                            self.sort(s)?;
                            if !self.funs.insert(symbol(sel)?) {
                                return Err("selector declared twice".into());
                            }
                        }
                    }
                }
                Ok(())
            }
            "declare-fun" => {
                let [n, params, ret] = args else { return Err("malformed declare-fun".into()) };
                list(params)?.iter().try_for_each(|p| self.sort(p))?;
                self.sort(ret)?;
                self.declare(symbol(n)?)
            }
            "declare-const" => {
                let [n, s] = args else { return Err("malformed declare-const".into()) };
                self.sort(s)?;
                self.declare(symbol(n)?)
            }
            "define-fun" | "define-fun-rec" => {
                let [n, params, ret, body] = args else { return Err("malformed define-fun".into()) };
                let mut vars = self.sorted_vars(params)?;
                self.sort(ret)?;
                let name = symbol(n)?;
                if atom(head)? == "define-fun-rec" {
                    self.declare(name.clone())?;
                }
                self.term(body, &mut vars)?;
                if atom(head)? == "define-fun" {
                    self.declare(name)?;
                }
                Ok(())
            }
            "define-funs-rec" => {
                let [decls, bodies] = args else { return Err("malformed define-funs-rec".into()) };
                let (decls, bodies) = (list(decls)?, list(bodies)?);
                if decls.len() != bodies.len() || decls.is_empty() {
                    return Err("define-funs-rec declarations and bodies differ in number".into());
                }
                let mut params = Vec::new();
                for d in decls {
                    let [n, ps, ret] = list(d)? else { return Err("malformed function declaration".into()) };
                    params.push(self.sorted_vars(ps)?);
                    self.sort(ret)?;
                    self.declare(symbol(n)?)?;
                }
                for (mut vars, b) in params.into_iter().zip(bodies) {
                    self.term(b, &mut vars)?;
                }
                Ok(())
            }
            "assert" => {
                let [t] = args else { return Err("assert takes one term".into()) };
                self.term(t, &mut Vec::new())
            }
            "check-sat" | "exit" | "get-model" | "get-unsat-core" => {
                if args.is_empty() {
                    Ok(())
                } else {
                    Err("command takes no arguments".into())
                }
            }
            other => Err(format!("unknown command `{other}`")),
        }
    }

    fn declare(&mut self, name: String) -> Result<(), String> {
        if self.funs.contains(&name) || self.ctors.contains(&name) || THEORY.contains(&name.as_str()) {
            return Err(format!("`{name}` declared twice"));
        }
        self.funs.insert(name);
        Ok(())
    }
}

/// Summary of a well-formed script.
#[derive(Debug, Default)]
pub struct Shape {
    pub commands: HashMap<String, usize>,
}

/// Checks `text` as an SMT-LIB2 script ending in `(check-sat)`.
pub fn check_script(text: &str) -> Result<Shape, String> {
    let cmds = parse(text)?;
    let mut scope = Scope::default();
    let mut shape = Shape::default();
    for (i, c) in cmds.iter().enumerate() {
        scope.command(c).map_err(|e| format!("command {}: {e}", i + 1))?;
        let head = atom(&list(c)?[0])?.to_string();
        *shape.commands.entry(head).or_default() += 1;
    }
    if cmds.last() != Some(&Sx::List(vec![Sx::Atom("check-sat".into())])) {
        return Err("script does not end with (check-sat)".into());
    }
    Ok(shape)
}
