use std::fmt::{self, Write};

use num_traits::Signed;

use super::{Expr, Literal, UnaryOp};

const PREFIX_PREC: u8 = 7;
const ATOM_PREC: u8 = 8;

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Binary(op, ..) => op.precedence(),
        Expr::Unary(UnaryOp::Not | UnaryOp::Neg, _) => PREFIX_PREC,
        _ => ATOM_PREC,
    }
}

fn write_str_lit(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    f.write_char('"')?;
    for c in s.chars() {
        match c {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            '\t' => f.write_str("\\t")?,
            c => f.write_char(c)?,
        }
    }
    f.write_char('"')
}

fn paren(f: &mut fmt::Formatter<'_>, e: &Expr, wrap: bool) -> fmt::Result {
    if wrap {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

fn is_numeric_lit(e: &Expr) -> bool {
    matches!(e, Expr::Lit(Literal::Int(_) | Literal::Float(_)))
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Int(n) => write!(f, "{n}"),
            Literal::Float(d) => write!(f, "{d}"),
            Literal::Bool(b) => write!(f, "{b}"),
            Literal::Str(s) => write_str_lit(f, s),
        }
    }
}

/// Prints with the minimum parentheses needed for the text to parse back
/// to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Lit(l) => write!(f, "{l}"),
            Expr::ValueRef => f.write_str("value"),
            Expr::FieldRef(name) => write!(f, "field({name})"),
            Expr::EnvRef(name) => write!(f, "env.{name}"),
            Expr::Unary(op @ (UnaryOp::IsSome | UnaryOp::IsNone | UnaryOp::Unwrap), e) => {
                write!(f, "{}({e})", op.name())
            }
            Expr::Unary(UnaryOp::Not, e) => {
                f.write_str("not ")?;
                paren(f, e, prec(e) < PREFIX_PREC)
            }
            Expr::Unary(UnaryOp::Neg, e) => {
                f.write_str("-")?;
                // `-5` would re-parse as a negative literal rather than a negation.
                let negative_lit = matches!(&**e, Expr::Lit(Literal::Int(n)) if n.is_negative())
                    || matches!(&**e, Expr::Lit(Literal::Float(d)) if d.text().starts_with('-'));
                paren(f, e, prec(e) < PREFIX_PREC || is_numeric_lit(e) || negative_lit)
            }
            Expr::Binary(op, l, r) => {
                let p = op.precedence();
                let (lp, rp) = (prec(l), prec(r));
                paren(f, l, lp < p || (lp == p && op.right_assoc()))?;
                write!(f, " {} ", op.symbol())?;
                paren(f, r, rp < p || (rp == p && !op.right_assoc()))
            }
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_char(')')
            }
        }
    }
}
