//! The constraint language: a small, typed expression language in which
//! field properties and cross-field constraints are written.
//!
//! ```text
//! value mod env.hw_page_size == 0
//! field(mapreduce.job.ubertask.enable) implies
//!     field(mapreduce.map.memory.mb) < field(yarn.app.mapreduce.am.resource.mb)
//! ```
//!
//! Integers are arbitrary precision. Division truncates toward zero and `mod`
//! takes the sign of the dividend. Floats compare with a 1e-9 tolerance.

mod eval;
mod lexer;
mod parser;
mod print;
mod typeck;

use std::fmt;

use num_bigint::BigInt;

use crate::model::Decimal;

pub use lexer::is_field_name_char;
pub use eval::{eval_expr, EvalError, FieldView, Value};
pub use parser::{parse_expr, ParseError};
pub use typeck::{env_types, typecheck_expr, TypeError};

#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    Int(BigInt),
    Float(Decimal),
    Bool(bool),
    Str(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Not,
    Neg,
    IsSome,
    IsNone,
    Unwrap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
    In,
    Implies,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Min,
    Max,
    Len,
    InitHeap,
    MaxHeap,
}

/// Constraint expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Lit(Literal),
    /// The field's own lifted value; only meaningful inside a field property.
    ValueRef,
    FieldRef(String),
    EnvRef(String),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExprType {
    Int,
    Bool,
    Str,
    Float,
    OptInt,
    StrList,
    JavaOpts,
}

impl fmt::Display for ExprType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExprType::Int => "int",
            ExprType::Bool => "bool",
            ExprType::Str => "str",
            ExprType::Float => "float",
            ExprType::OptInt => "option int",
            ExprType::StrList => "string list",
            ExprType::JavaOpts => "jvm options",
        })
    }
}

impl ExprType {
    /// Expression type a lifted value of the given base type evaluates as.
    /// Positive and non-negative integers widen to plain integers.
    pub fn of_tipe(t: crate::model::RTipe) -> ExprType {
        use crate::model::RTipe;
        match t {
            RTipe::Int | RTipe::Pos | RTipe::NonNeg => ExprType::Int,
            RTipe::Str => ExprType::Str,
            RTipe::Bool => ExprType::Bool,
            RTipe::Float => ExprType::Float,
            RTipe::JavaOpts => ExprType::JavaOpts,
            RTipe::OptionPos => ExprType::OptInt,
        }
    }

    fn is_numeric(self) -> bool {
        matches!(self, ExprType::Int | ExprType::Float)
    }
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "mod",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::And => "and",
            BinOp::Or => "or",
            BinOp::In => "in",
            BinOp::Implies => "implies",
        }
    }

    /// Binding strength; higher binds tighter.
    pub(crate) fn precedence(self) -> u8 {
        match self {
            BinOp::Implies => 1,
            BinOp::Or => 2,
            BinOp::And => 3,
            BinOp::Lt
            | BinOp::Le
            | BinOp::Gt
            | BinOp::Ge
            | BinOp::Eq
            | BinOp::Ne
            | BinOp::In => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div | BinOp::Mod => 6,
        }
    }

    pub(crate) fn right_assoc(self) -> bool {
        self == BinOp::Implies
    }
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Min => "min",
            Func::Max => "max",
            Func::Len => "len",
            Func::InitHeap => "init_heap",
            Func::MaxHeap => "max_heap",
        }
    }
}

impl UnaryOp {
    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Not => "not",
            UnaryOp::Neg => "-",
            UnaryOp::IsSome => "is_some",
            UnaryOp::IsNone => "is_none",
            UnaryOp::Unwrap => "unwrap",
        }
    }
}

impl Expr {
    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn unary(op: UnaryOp, operand: Expr) -> Expr {
        Expr::Unary(op, Box::new(operand))
    }

    pub fn int(n: impl Into<BigInt>) -> Expr {
        Expr::Lit(Literal::Int(n.into()))
    }

    pub fn field(name: impl Into<String>) -> Expr {
        Expr::FieldRef(name.into())
    }

    pub fn env(name: impl Into<String>) -> Expr {
        Expr::EnvRef(name.into())
    }

    /// Calls `f` on every node, parents before children.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match self {
            Expr::Unary(_, e) => e.walk(f),
            Expr::Binary(_, l, r) => {
                l.walk(f);
                r.walk(f);
            }
            Expr::Call(_, args) => args.iter().for_each(|a| a.walk(f)),
            Expr::Lit(_) | Expr::ValueRef | Expr::FieldRef(_) | Expr::EnvRef(_) => {}
        }
    }

    /// Distinct field names referenced through `field(...)`, in first-use order.
    pub fn field_refs(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        self.walk(&mut |e| {
            if let Expr::FieldRef(name) = e {
                if !out.contains(&name.as_str()) {
                    out.push(name);
                }
            }
        });
        out
    }

    pub fn uses_value(&self) -> bool {
        let mut found = false;
        self.walk(&mut |e| found |= matches!(e, Expr::ValueRef));
        found
    }
}
