use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use super::{BinOp, Expr, Func, Literal, UnaryOp};
use crate::env::{EnvValue, Environment};
use crate::model::{BaseValue, JavaOpts, FLOAT_TOLERANCE};

/// Runtime value of the constraint language.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(BigInt),
    Float(f64),
    Bool(bool),
    Str(String),
    OptInt(Option<BigInt>),
    StrList(Vec<String>),
    Jvm(JavaOpts),
}

impl Value {
    /// Widens a lifted value into the evaluator's domain.
    pub fn from_base(v: &BaseValue) -> Value {
        match v {
            BaseValue::Int(i) => Value::Int(i.clone()),
            BaseValue::Pos(p) => Value::Int(p.get().clone()),
            BaseValue::NonNeg(n) => Value::Int(n.get().clone()),
            BaseValue::Str(s) => Value::Str(s.clone()),
            BaseValue::Bool(b) => Value::Bool(*b),
            BaseValue::Float(d) => Value::Float(d.value()),
            BaseValue::Jvm(j) => Value::Jvm(j.clone()),
            BaseValue::OptPos(o) => Value::OptInt(o.as_ref().map(|p| p.get().clone())),
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivByZero,
    #[error("unwrap of an absent value")]
    UnwrapNone,
    #[error("field `{0}` has no lifted value")]
    UnresolvedField(String),
    #[error("`value` is not bound here")]
    ValueUnbound,
    #[error("unknown environment parameter `{0}`")]
    UnknownEnv(String),
    /// Only reachable with input that did not pass the type checker.
    #[error("ill-typed operands for `{0}`")]
    IllTyped(String),
}

/// Lookup of other fields' lifted values during cross-field evaluation.
pub trait FieldView {
    fn field(&self, name: &str) -> Option<&BaseValue>;
}

impl FieldView for () {
    fn field(&self, _: &str) -> Option<&BaseValue> {
        None
    }
}

impl FieldView for BTreeMap<String, BaseValue> {
    fn field(&self, name: &str) -> Option<&BaseValue> {
        self.get(name)
    }
}

impl FieldView for HashMap<String, BaseValue> {
    fn field(&self, name: &str) -> Option<&BaseValue> {
        self.get(name)
    }
}

impl FieldView for HashMap<&str, BaseValue> {
    fn field(&self, name: &str) -> Option<&BaseValue> {
        self.get(name)
    }
}

/// Evaluates a type-checked expression.
///
/// `and`, `or` and `implies` short-circuit, so `is_some(x) and unwrap(x) > 0`
/// never fails on an absent `x`.
pub fn eval_expr(
    e: &Expr,
    self_val: Option<&BaseValue>,
    config_view: &dyn FieldView,
    env: &Environment,
) -> Result<Value, EvalError> {
    Evaluator {
        self_val,
        view: config_view,
        env,
    }
    .eval(e)
}

struct Evaluator<'a> {
    self_val: Option<&'a BaseValue>,
    view: &'a dyn FieldView,
    env: &'a Environment,
}

fn to_f64(v: &Value) -> Option<f64> {
    match v {
        Value::Int(i) => i.to_f64(),
        Value::Float(f) => Some(*f),
        _ => None,
    }
}

fn ill(op: &str) -> EvalError {
    EvalError::IllTyped(op.to_string())
}

impl Evaluator<'_> {
    fn eval_bool(&self, e: &Expr, op: &str) -> Result<bool, EvalError> {
        self.eval(e)?.as_bool().ok_or_else(|| ill(op))
    }

    fn eval(&self, e: &Expr) -> Result<Value, EvalError> {
        match e {
            Expr::Lit(Literal::Int(n)) => Ok(Value::Int(n.clone())),
            Expr::Lit(Literal::Float(d)) => Ok(Value::Float(d.value())),
            Expr::Lit(Literal::Bool(b)) => Ok(Value::Bool(*b)),
            Expr::Lit(Literal::Str(s)) => Ok(Value::Str(s.clone())),
            Expr::ValueRef => self
                .self_val
                .map(Value::from_base)
                .ok_or(EvalError::ValueUnbound),
            Expr::FieldRef(name) => self
                .view
                .field(name)
                .map(Value::from_base)
                .ok_or_else(|| EvalError::UnresolvedField(name.clone())),
            Expr::EnvRef(name) => match self.env.lookup(name) {
                Some(EnvValue::Int(n)) => Ok(Value::Int(BigInt::from(n))),
                Some(EnvValue::StrList(l)) => Ok(Value::StrList(l.to_vec())),
                None => Err(EvalError::UnknownEnv(name.clone())),
            },
            Expr::Unary(op, inner) => {
                let v = self.eval(inner)?;
                match (op, v) {
                    (UnaryOp::Not, Value::Bool(b)) => Ok(Value::Bool(!b)),
                    (UnaryOp::Neg, Value::Int(i)) => Ok(Value::Int(-i)),
                    (UnaryOp::Neg, Value::Float(f)) => Ok(Value::Float(-f)),
                    (UnaryOp::IsSome, Value::OptInt(o)) => Ok(Value::Bool(o.is_some())),
                    (UnaryOp::IsNone, Value::OptInt(o)) => Ok(Value::Bool(o.is_none())),
                    (UnaryOp::Unwrap, Value::OptInt(o)) => {
                        o.map(Value::Int).ok_or(EvalError::UnwrapNone)
                    }
                    _ => Err(ill(op.name())),
                }
            }
            Expr::Binary(op, l, r) => self.binary(*op, l, r),
            Expr::Call(func, args) => self.call(*func, args),
        }
    }

    fn binary(&self, op: BinOp, l: &Expr, r: &Expr) -> Result<Value, EvalError> {
        let sym = op.symbol();
        match op {
            BinOp::And => {
                return Ok(Value::Bool(
                    self.eval_bool(l, sym)? && self.eval_bool(r, sym)?,
                ))
            }
            BinOp::Or => {
                return Ok(Value::Bool(
                    self.eval_bool(l, sym)? || self.eval_bool(r, sym)?,
                ))
            }
            BinOp::Implies => {
                return Ok(Value::Bool(
                    !self.eval_bool(l, sym)? || self.eval_bool(r, sym)?,
                ))
            }
            _ => {}
        }
        let lv = self.eval(l)?;
        let rv = self.eval(r)?;
        match (op, &lv, &rv) {
            (BinOp::In, Value::Str(s), Value::StrList(list)) => {
                return Ok(Value::Bool(list.iter().any(|x| x == s)))
            }
            (BinOp::In, ..) => return Err(ill(sym)),
            _ => {}
        }
        if let (Value::Int(a), Value::Int(b)) = (&lv, &rv) {
            return Ok(match op {
                BinOp::Add => Value::Int(a + b),
                BinOp::Sub => Value::Int(a - b),
                BinOp::Mul => Value::Int(a * b),
                // BigInt division truncates toward zero; remainder follows the dividend.
                BinOp::Div | BinOp::Mod if b.is_zero() => return Err(EvalError::DivByZero),
                BinOp::Div => Value::Int(a / b),
                BinOp::Mod => Value::Int(a % b),
                BinOp::Lt => Value::Bool(a < b),
                BinOp::Le => Value::Bool(a <= b),
                BinOp::Gt => Value::Bool(a > b),
                BinOp::Ge => Value::Bool(a >= b),
                BinOp::Eq => Value::Bool(a == b),
                BinOp::Ne => Value::Bool(a != b),
                _ => return Err(ill(sym)),
            });
        }
        if let (Some(a), Some(b)) = (to_f64(&lv), to_f64(&rv)) {
            let diff = a - b;
            return Ok(match op {
                BinOp::Add => Value::Float(a + b),
                BinOp::Sub => Value::Float(diff),
                BinOp::Mul => Value::Float(a * b),
                BinOp::Div if b == 0.0 => return Err(EvalError::DivByZero),
                BinOp::Div => Value::Float(a / b),
                BinOp::Lt => Value::Bool(diff < -FLOAT_TOLERANCE),
                BinOp::Le => Value::Bool(diff <= FLOAT_TOLERANCE),
                BinOp::Gt => Value::Bool(diff > FLOAT_TOLERANCE),
                BinOp::Ge => Value::Bool(diff >= -FLOAT_TOLERANCE),
                BinOp::Eq => Value::Bool(diff.abs() <= FLOAT_TOLERANCE),
                BinOp::Ne => Value::Bool(diff.abs() > FLOAT_TOLERANCE),
                _ => return Err(ill(sym)),
            });
        }
        match op {
            BinOp::Eq | BinOp::Ne if std::mem::discriminant(&lv) == std::mem::discriminant(&rv) => {
                Ok(Value::Bool((lv == rv) == (op == BinOp::Eq)))
            }
            _ => Err(ill(sym)),
        }
    }

    fn call(&self, func: Func, args: &[Expr]) -> Result<Value, EvalError> {
        let values = args
            .iter()
            .map(|a| self.eval(a))
            .collect::<Result<Vec<_>, _>>()?;
        match func {
            Func::Min | Func::Max => {
                if values.len() < 2 {
                    return Err(ill(func.name()));
                }
                if values.iter().all(|v| matches!(v, Value::Int(_))) {
                    let ints = values.into_iter().map(|v| match v {
                        Value::Int(i) => i,
                        _ => unreachable!(),
                    });
                    let pick = if func == Func::Min {
                        ints.min()
                    } else {
                        ints.max()
                    };
                    return Ok(Value::Int(pick.expect("at least two arguments")));
                }
                let floats = values
                    .iter()
                    .map(to_f64)
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| ill(func.name()))?;
                let pick = floats.into_iter().reduce(if func == Func::Min {
                    f64::min
                } else {
                    f64::max
                });
                Ok(Value::Float(pick.expect("at least two arguments")))
            }
            Func::Len => match values.as_slice() {
                [Value::Str(s)] => Ok(Value::Int(BigInt::from(s.chars().count()))),
                [Value::StrList(l)] => Ok(Value::Int(BigInt::from(l.len()))),
                _ => Err(ill(func.name())),
            },
            Func::InitHeap | Func::MaxHeap => match values.as_slice() {
                [Value::Jvm(j)] => Ok(Value::Int(BigInt::from(if func == Func::InitHeap {
                    j.init_heap_mb()
                } else {
                    j.max_heap_mb()
                }))),
                _ => Err(ill(func.name())),
            },
        }
    }
}
