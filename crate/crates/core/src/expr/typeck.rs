use std::collections::BTreeMap;

use num_traits::Zero;
use thiserror::Error;

use super::{BinOp, Expr, ExprType, Func, Literal, UnaryOp};
use crate::env::{CODECS_KEY, NUMERIC_KEYS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("type error in `{node}`: {message}")]
    Mismatch { node: String, message: String },
    #[error("unknown field `{0}`")]
    UnknownField(String),
    #[error("unknown environment parameter `{0}`")]
    UnknownEnv(String),
    #[error("`value` is only available inside a field property")]
    ValueNotAllowed,
    #[error("division by literal zero in `{0}`")]
    ZeroDivisor(String),
}

fn mismatch(node: &Expr, message: impl Into<String>) -> TypeError {
    TypeError::Mismatch {
        node: node.to_string(),
        message: message.into(),
    }
}

/// Types of the environment parameters visible as `env.<name>`.
pub fn env_types() -> BTreeMap<String, ExprType> {
    NUMERIC_KEYS
        .iter()
        .map(|k| (k.to_string(), ExprType::Int))
        .chain(std::iter::once((CODECS_KEY.to_string(), ExprType::StrList)))
        .collect()
}

/// Infers the type of `e`.
///
/// `self_type` is the type bound to `value`; `None` outside field properties.
pub fn typecheck_expr(
    e: &Expr,
    self_type: Option<ExprType>,
    schema_types: &BTreeMap<String, ExprType>,
    env_types: &BTreeMap<String, ExprType>,
) -> Result<ExprType, TypeError> {
    Checker {
        self_type,
        schema_types,
        env_types,
    }
    .infer(e)
}

struct Checker<'a> {
    self_type: Option<ExprType>,
    schema_types: &'a BTreeMap<String, ExprType>,
    env_types: &'a BTreeMap<String, ExprType>,
}

impl Checker<'_> {
    fn infer(&self, e: &Expr) -> Result<ExprType, TypeError> {
        use ExprType::*;
        match e {
            Expr::Lit(Literal::Int(_)) => Ok(Int),
            Expr::Lit(Literal::Float(_)) => Ok(Float),
            Expr::Lit(Literal::Bool(_)) => Ok(Bool),
            Expr::Lit(Literal::Str(_)) => Ok(Str),
            Expr::ValueRef => self.self_type.ok_or(TypeError::ValueNotAllowed),
            Expr::FieldRef(name) => self
                .schema_types
                .get(name)
                .copied()
                .ok_or_else(|| TypeError::UnknownField(name.clone())),
            Expr::EnvRef(name) => self
                .env_types
                .get(name)
                .copied()
                .ok_or_else(|| TypeError::UnknownEnv(name.clone())),
            Expr::Unary(op, inner) => {
                let t = self.infer(inner)?;
                match (op, t) {
                    (UnaryOp::Not, Bool) => Ok(Bool),
                    (UnaryOp::Neg, Int | Float) => Ok(t),
                    (UnaryOp::IsSome | UnaryOp::IsNone, OptInt) => Ok(Bool),
                    (UnaryOp::Unwrap, OptInt) => Ok(Int),
                    _ => Err(mismatch(e, format!("`{}` cannot take {t}", op.name()))),
                }
            }
            Expr::Binary(op, l, r) => {
                let lt = self.infer(l)?;
                let rt = self.infer(r)?;
                self.binary(e, *op, lt, rt, r)
            }
            Expr::Call(func, args) => {
                let types = args
                    .iter()
                    .map(|a| self.infer(a))
                    .collect::<Result<Vec<_>, _>>()?;
                match func {
                    Func::Min | Func::Max => {
                        if types.len() < 2 {
                            return Err(mismatch(e, "needs at least two arguments"));
                        }
                        if types.iter().all(|t| *t == Int) {
                            Ok(Int)
                        } else if types.iter().all(|t| t.is_numeric()) {
                            Ok(Float)
                        } else {
                            Err(mismatch(e, "arguments must be numeric"))
                        }
                    }
                    Func::Len => match types.as_slice() {
                        [Str | StrList] => Ok(Int),
                        _ => Err(mismatch(e, "takes one string or string list")),
                    },
                    Func::InitHeap | Func::MaxHeap => match types.as_slice() {
                        [JavaOpts] => Ok(Int),
                        _ => Err(mismatch(e, "takes one jvm options value")),
                    },
                }
            }
        }
    }

    fn binary(
        &self,
        e: &Expr,
        op: BinOp,
        lt: ExprType,
        rt: ExprType,
        rhs: &Expr,
    ) -> Result<ExprType, TypeError> {
        use ExprType::*;
        let numeric = lt.is_numeric() && rt.is_numeric();
        let widened = if lt == Int && rt == Int { Int } else { Float };
        match op {
            BinOp::Add | BinOp::Sub | BinOp::Mul if numeric => Ok(widened),
            BinOp::Div | BinOp::Mod if numeric => {
                if op == BinOp::Mod && widened != Int {
                    return Err(mismatch(e, "`mod` needs integer operands"));
                }
                let zero = match rhs {
                    Expr::Lit(Literal::Int(n)) => n.is_zero(),
                    Expr::Lit(Literal::Float(d)) => d.value() == 0.0,
                    _ => false,
                };
                if zero {
                    return Err(TypeError::ZeroDivisor(e.to_string()));
                }
                Ok(widened)
            }
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge if numeric => Ok(Bool),
            BinOp::Eq | BinOp::Ne if numeric || lt == rt => Ok(Bool),
            BinOp::And | BinOp::Or | BinOp::Implies if lt == Bool && rt == Bool => Ok(Bool),
            BinOp::In if lt == Str && rt == StrList => Ok(Bool),
            _ => Err(mismatch(
                e,
                format!("`{}` cannot combine {lt} and {rt}", op.symbol()),
            )),
        }
    }
}
