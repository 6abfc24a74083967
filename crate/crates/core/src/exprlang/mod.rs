//! A small arithmetic expression language.
//!
//! Scenario files use it to define metric entries and map components without
//! recompiling. Grammar, loosest binding first:
//!
//! ```text
//! expr     := term (("+" | "-") term)*
//! term     := unary (("*" | "/") unary)*
//! unary    := "-" unary | power
//! power    := atom ("^" exponent)?
//! exponent := "-"? INTEGER ("^" exponent)? | "(" exponent ")"
//! atom     := NUMBER | "pi" | "x" INDEX | FUNC "(" expr ")" | "(" expr ")"
//! FUNC     := sin | cos | exp | sqrt | log
//! ```
//!
//! Variables are `x1..xN` (1-based). Exponents must fold to an integer at
//! parse time; `^` is right-associative.

mod eval;
mod parser;
mod print;

use std::fmt;

use thiserror::Error;

use crate::numcore::DomainError;

pub use parser::parse;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
    Log,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
            Func::Log => "log",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "sqrt" => Func::Sqrt,
            "log" => Func::Log,
            _ => return None,
        })
    }

    pub const ALL: [Func; 5] = [Func::Sin, Func::Cos, Func::Exp, Func::Sqrt, Func::Log];
}

/// Expression tree. Variable indices are 0-based internally (`x1` is `Var(0)`).
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

impl Expr {
    /// Number of variables referenced (highest index + 1).
    pub fn min_arity(&self) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Var(i) => i + 1,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.min_arity(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => a.min_arity().max(b.min_arity()),
        }
    }

    /// Replace every `Var(i)` by `replacements[i]`.
    pub fn substitute(&self, replacements: &[Expr]) -> Expr {
        let sub = |e: &Expr| Box::new(e.substitute(replacements));
        match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::Var(i) => replacements[*i].clone(),
            Expr::Neg(a) => Expr::Neg(sub(a)),
            Expr::Add(a, b) => Expr::Add(sub(a), sub(b)),
            Expr::Sub(a, b) => Expr::Sub(sub(a), sub(b)),
            Expr::Mul(a, b) => Expr::Mul(sub(a), sub(b)),
            Expr::Div(a, b) => Expr::Div(sub(a), sub(b)),
            Expr::Pow(a, n) => Expr::Pow(sub(a), *n),
            Expr::Call(f, a) => Expr::Call(*f, sub(a)),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        print::write_expr(f, self, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("empty expression")]
    Empty,
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("variable x{index} at byte {offset} exceeds arity {arity}")]
    VariableOutOfRange { index: usize, arity: usize, offset: usize },
    #[error("exponent at byte {offset} is not an integer")]
    NonIntegerExponent { offset: usize },
}

/// Evaluation failure; `location` is the offending sub-expression or formula.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("{primitive} in `{location}`")]
    Domain { primitive: DomainError, location: String },
    #[error("expected {expected} arguments, got {found}")]
    Arity { expected: usize, found: usize },
}

impl EvalError {
    pub fn domain(primitive: DomainError, location: impl Into<String>) -> Self {
        EvalError::Domain {
            primitive,
            location: location.into(),
        }
    }
}
