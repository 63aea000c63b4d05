//! Runtime values shared by both evaluators.

use std::fmt;
use std::rc::Rc;

use crate::ast::Expr;

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Unit,
    /// Constructor application, including list cells and continuation
    /// constructors.
    Ctor(String, Vec<Value>),
    Tuple(Vec<Value>),
    /// A function value; only the higher-order evaluator builds these.
    Closure(Rc<Closure>),
}

#[derive(Debug, PartialEq)]
pub struct Closure {
    pub param: String,
    pub body: Expr,
    pub env: Vec<(String, Value)>,
}

impl Value {
    pub fn nil() -> Value {
        Value::Ctor("Nil".into(), vec![])
    }

    pub fn cons(h: Value, t: Value) -> Value {
        Value::Ctor("Cons".into(), vec![h, t])
    }

    pub fn list(items: impl IntoIterator<Item = Value>) -> Value {
        let items: Vec<Value> = items.into_iter().collect();
        items.into_iter().rev().fold(Value::nil(), |acc, v| Value::cons(v, acc))
    }

    /// Elements of a `Nil`/`Cons` chain.
    pub fn as_list(&self) -> Option<Vec<&Value>> {
        let mut out = Vec::new();
        let mut cur = self;
        loop {
            match cur {
                Value::Ctor(c, xs) if c == "Nil" && xs.is_empty() => return Some(out),
                Value::Ctor(c, xs) if c == "Cons" && xs.len() == 2 => {
                    out.push(&xs[0]);
                    cur = &xs[1];
                }
                _ => return None,
            }
        }
    }

    pub fn contains_closure(&self) -> bool {
        match self {
            Value::Closure(_) => true,
            Value::Ctor(_, xs) | Value::Tuple(xs) => xs.iter().any(Value::contains_closure),
            _ => false,
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self {
            Value::Ctor(_, xs) | Value::Tuple(xs) => 1 + xs.iter().map(Value::size).sum::<usize>(),
            _ => 1,
        }
    }
}

/// Lists print as `[1;2;3]`, constructors as `K(a, b)`.
impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(items) = self.as_list() {
            let items: Vec<String> = items.iter().map(|v| v.to_string()).collect();
            return write!(f, "[{}]", items.join(";"));
        }
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Unit => write!(f, "()"),
            Value::Ctor(c, xs) if xs.is_empty() => write!(f, "{c}"),
            Value::Ctor(c, xs) => {
                let xs: Vec<String> = xs.iter().map(|v| v.to_string()).collect();
                write!(f, "{c}({})", xs.join(", "))
            }
            Value::Tuple(xs) => {
                let xs: Vec<String> = xs.iter().map(|v| v.to_string()).collect();
                write!(f, "({})", xs.join(", "))
            }
            Value::Closure(c) => write!(f, "<fun {}>", c.param),
        }
    }
}

/// The value of a constant expression: literals, constructors, lists and
/// tuples.
pub fn value_of_expr(e: &Expr) -> Option<Value> {
    use crate::ast::{ExprKind, UnOp};
    Some(match &e.kind {
        ExprKind::Unit => Value::Unit,
        ExprKind::Int(n) => Value::Int(*n),
        ExprKind::UnOp(UnOp::Neg, a) => match value_of_expr(a)? {
            Value::Int(n) => Value::Int(n.checked_neg()?),
            _ => return None,
        },
        ExprKind::Bool(b) => Value::Bool(*b),
        ExprKind::Nil => Value::nil(),
        ExprKind::Cons(h, t) => Value::cons(value_of_expr(h)?, value_of_expr(t)?),
        ExprKind::Ctor(c, xs) => Value::Ctor(c.clone(), xs.iter().map(value_of_expr).collect::<Option<_>>()?),
        ExprKind::Tuple(xs) => Value::Tuple(xs.iter().map(value_of_expr).collect::<Option<_>>()?),
        _ => return None,
    })
}

/// Parses a value written in source syntax, such as `[1;2;3]` or
/// `Sub (Const 5, Const 2)`.
pub fn parse_value(text: &str) -> Result<Value, String> {
    let e = crate::frontend::parse_expr(text).map_err(|e| e.to_string())?;
    value_of_expr(&e).ok_or_else(|| format!("`{text}` is not a constant value"))
}
