use std::fmt;

use super::Expr;

// Binding strength; a child printed below its required level gets parens.
const ADD: u8 = 1;
const MUL: u8 = 2;
const NEG: u8 = 3;
const ATOM: u8 = 5;

fn level(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => ADD,
        Expr::Mul(..) | Expr::Div(..) => MUL,
        Expr::Neg(..) => NEG,
        Expr::Pow(..) => 4,
        Expr::Const(..) | Expr::Var(..) | Expr::Call(..) => ATOM,
    }
}

/// Canonical form: minimal parentheses, `{:?}` float formatting (shortest
/// round-trip representation).
pub(super) fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if level(e) < min {
        f.write_str("(")?;
        write_expr(f, e, 0)?;
        return f.write_str(")");
    }
    match e {
        Expr::Const(c) => write!(f, "{c:?}"),
        Expr::Var(i) => write!(f, "x{}", i + 1),
        Expr::Neg(a) => {
            f.write_str("-")?;
            write_expr(f, a, NEG)
        }
        Expr::Add(a, b) => binary(f, a, " + ", b, ADD),
        Expr::Sub(a, b) => binary(f, a, " - ", b, ADD),
        Expr::Mul(a, b) => binary(f, a, " * ", b, MUL),
        Expr::Div(a, b) => binary(f, a, " / ", b, MUL),
        Expr::Pow(a, n) => {
            write_expr(f, a, ATOM)?;
            write!(f, "^{n}")
        }
        Expr::Call(func, a) => {
            write!(f, "{}(", func.name())?;
            write_expr(f, a, 0)?;
            f.write_str(")")
        }
    }
}

fn binary(f: &mut fmt::Formatter<'_>, a: &Expr, op: &str, b: &Expr, lvl: u8) -> fmt::Result {
    write_expr(f, a, lvl)?;
    f.write_str(op)?;
    write_expr(f, b, lvl + 1)
}
