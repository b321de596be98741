use thiserror::Error;

use super::lexer::{tokenize, Spanned, Tok};
use super::{BinOp, Expr, Func, Literal, UnaryOp};
use crate::model::Decimal;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at offset {pos}: {message}")]
pub struct ParseError {
    pub pos: usize,
    pub message: String,
}

impl ParseError {
    pub(super) fn new(pos: usize, message: impl Into<String>) -> Self {
        ParseError {
            pos,
            message: message.into(),
        }
    }
}

const KEYWORDS: [&str; 9] = [
    "and", "or", "not", "implies", "mod", "in", "true", "false", "value",
];

/// Parses constraint source text.
///
/// Precedence, loosest first: `implies` (right-associative), `or`, `and`,
/// comparisons and `in`, `+ -`, `* / mod`, prefix `not` and `-`.
pub fn parse_expr(source: &str) -> Result<Expr, ParseError> {
    let tokens = tokenize(source)?;
    let mut p = Parser {
        tokens,
        idx: 0,
        end: source.len(),
    };
    let e = p.implies()?;
    match p.peek() {
        None => Ok(e),
        Some(t) => Err(ParseError::new(t.pos, "unexpected trailing input")),
    }
}

struct Parser {
    tokens: Vec<Spanned>,
    idx: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Spanned> {
        self.tokens.get(self.idx)
    }

    fn pos(&self) -> usize {
        self.peek().map_or(self.end, |t| t.pos)
    }

    fn next(&mut self) -> Option<Spanned> {
        let t = self.tokens.get(self.idx).cloned();
        self.idx += 1;
        t
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Spanned { tok: Tok::Ident(w), .. }) if w == kw)
    }

    fn at_sym(&self, sym: &str) -> bool {
        matches!(self.peek(), Some(Spanned { tok: Tok::Sym(s), .. }) if *s == sym)
    }

    fn expect_sym(&mut self, sym: &str) -> Result<(), ParseError> {
        if self.at_sym(sym) {
            self.idx += 1;
            Ok(())
        } else {
            Err(ParseError::new(self.pos(), format!("expected `{sym}`")))
        }
    }

    fn implies(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.or()?;
        if self.at_keyword("implies") {
            self.idx += 1;
            let rhs = self.implies()?;
            return Ok(Expr::binary(BinOp::Implies, lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.and()?;
        while self.at_keyword("or") {
            self.idx += 1;
            let rhs = self.and()?;
            lhs = Expr::binary(BinOp::Or, lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.cmp()?;
        while self.at_keyword("and") {
            self.idx += 1;
            let rhs = self.cmp()?;
            lhs = Expr::binary(BinOp::And, lhs, rhs);
        }
        Ok(lhs)
    }

    fn cmp_op(&self) -> Option<BinOp> {
        match &self.peek()?.tok {
            Tok::Sym("<") => Some(BinOp::Lt),
            Tok::Sym("<=") => Some(BinOp::Le),
            Tok::Sym(">") => Some(BinOp::Gt),
            Tok::Sym(">=") => Some(BinOp::Ge),
            Tok::Sym("==") => Some(BinOp::Eq),
            Tok::Sym("!=") => Some(BinOp::Ne),
            Tok::Ident(w) if w == "in" => Some(BinOp::In),
            _ => None,
        }
    }

    fn cmp(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.add()?;
        while let Some(op) = self.cmp_op() {
            self.idx += 1;
            let rhs = self.add()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn add(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.mul()?;
        loop {
            let op = if self.at_sym("+") {
                BinOp::Add
            } else if self.at_sym("-") {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            self.idx += 1;
            let rhs = self.mul()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn mul(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.at_sym("*") {
                BinOp::Mul
            } else if self.at_sym("/") {
                BinOp::Div
            } else if self.at_keyword("mod") {
                BinOp::Mod
            } else {
                return Ok(lhs);
            };
            self.idx += 1;
            let rhs = self.unary()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.at_keyword("not") {
            self.idx += 1;
            return Ok(Expr::unary(UnaryOp::Not, self.unary()?));
        }
        if self.at_sym("-") {
            self.idx += 1;
            // A minus directly before a numeric literal is part of the literal.
            match self.peek().map(|t| t.tok.clone()) {
                Some(Tok::Int(n)) => {
                    self.idx += 1;
                    return Ok(Expr::Lit(Literal::Int(-n)));
                }
                Some(Tok::Float(text)) => {
                    let pos = self.pos();
                    self.idx += 1;
                    let d = Decimal::parse(&format!("-{text}"))
                        .map_err(|e| ParseError::new(pos, e.to_string()))?;
                    return Ok(Expr::Lit(Literal::Float(d)));
                }
                _ => return Ok(Expr::unary(UnaryOp::Neg, self.unary()?)),
            }
        }
        self.atom()
    }

    fn args(&mut self) -> Result<Vec<Expr>, ParseError> {
        self.expect_sym("(")?;
        let mut args = Vec::new();
        if self.at_sym(")") {
            self.idx += 1;
            return Ok(args);
        }
        loop {
            args.push(self.implies()?);
            if self.at_sym(",") {
                self.idx += 1;
                continue;
            }
            self.expect_sym(")")?;
            return Ok(args);
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        let Some(t) = self.next() else {
            return Err(ParseError::new(pos, "unexpected end of input"));
        };
        match t.tok {
            Tok::Int(n) => Ok(Expr::Lit(Literal::Int(n))),
            Tok::Float(text) => Decimal::parse(&text)
                .map(|d| Expr::Lit(Literal::Float(d)))
                .map_err(|e| ParseError::new(pos, e.to_string())),
            Tok::Str(s) => Ok(Expr::Lit(Literal::Str(s))),
            Tok::Env(name) => Ok(Expr::EnvRef(name)),
            Tok::Field(name) => Ok(Expr::FieldRef(name)),
            Tok::Sym("(") => {
                let e = self.implies()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Sym(s) => Err(ParseError::new(pos, format!("unexpected `{s}`"))),
            Tok::Ident(word) => match word.as_str() {
                "true" => Ok(Expr::Lit(Literal::Bool(true))),
                "false" => Ok(Expr::Lit(Literal::Bool(false))),
                "value" => Ok(Expr::ValueRef),
                "min" | "max" | "len" | "init_heap" | "max_heap" => {
                    let func = match word.as_str() {
                        "min" => Func::Min,
                        "max" => Func::Max,
                        "len" => Func::Len,
                        "init_heap" => Func::InitHeap,
                        _ => Func::MaxHeap,
                    };
                    Ok(Expr::Call(func, self.args()?))
                }
                "is_some" | "is_none" | "unwrap" => {
                    let op = match word.as_str() {
                        "is_some" => UnaryOp::IsSome,
                        "is_none" => UnaryOp::IsNone,
                        _ => UnaryOp::Unwrap,
                    };
                    let mut args = self.args()?;
                    if args.len() != 1 {
                        return Err(ParseError::new(
                            pos,
                            format!("`{word}` takes exactly one argument"),
                        ));
                    }
                    Ok(Expr::unary(op, args.pop().unwrap()))
                }
                kw if KEYWORDS.contains(&kw) => {
                    Err(ParseError::new(pos, format!("unexpected keyword `{kw}`")))
                }
                other => Err(ParseError::new(pos, format!("unknown identifier `{other}`"))),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn int(n: i64) -> Expr {
        Expr::Lit(Literal::Int(BigInt::from(n)))
    }

    #[test]
    fn page_size_divisibility() {
        let e = parse_expr("value mod env.hw_page_size == 0").unwrap();
        assert_eq!(
            e,
            Expr::binary(
                BinOp::Eq,
                Expr::binary(BinOp::Mod, Expr::ValueRef, Expr::env("hw_page_size")),
                int(0)
            )
        );
    }

    #[test]
    fn trivially_true_property() {
        assert_eq!(parse_expr("true").unwrap(), Expr::Lit(Literal::Bool(true)));
    }

    #[test]
    fn split_size_cross_constraint() {
        let e = parse_expr(
            "field(mapreduce.input.fileinputformat.split.maxsize) > field(mapreduce.input.fileinputformat.split.minsize)",
        )
        .unwrap();
        assert_eq!(
            e,
            Expr::binary(
                BinOp::Gt,
                Expr::field("mapreduce.input.fileinputformat.split.maxsize"),
                Expr::field("mapreduce.input.fileinputformat.split.minsize")
            )
        );
    }

    #[test]
    fn precedence_and_associativity() {
        let e = parse_expr("1 + 2 * 3 - 4").unwrap();
        assert_eq!(
            e,
            Expr::binary(
                BinOp::Sub,
                Expr::binary(BinOp::Add, int(1), Expr::binary(BinOp::Mul, int(2), int(3))),
                int(4)
            )
        );
        let a = Expr::Lit(Literal::Bool(true));
        let b = Expr::Lit(Literal::Bool(false));
        let e = parse_expr("true implies false implies true").unwrap();
        assert_eq!(
            e,
            Expr::binary(
                BinOp::Implies,
                a.clone(),
                Expr::binary(BinOp::Implies, b.clone(), a.clone())
            )
        );
        let e = parse_expr("true or false and true").unwrap();
        assert_eq!(
            e,
            Expr::binary(BinOp::Or, a.clone(), Expr::binary(BinOp::And, b, a))
        );
    }

    #[test]
    fn negative_literals_fold() {
        assert_eq!(parse_expr("-1").unwrap(), int(-1));
        assert_eq!(
            parse_expr("-value").unwrap(),
            Expr::unary(UnaryOp::Neg, Expr::ValueRef)
        );
        assert_eq!(
            parse_expr("-(1)").unwrap(),
            Expr::unary(UnaryOp::Neg, int(1))
        );
    }

    #[test]
    fn calls_and_option_ops() {
        assert_eq!(
            parse_expr("min(3, min(5, 4))").unwrap(),
            Expr::Call(Func::Min, vec![int(3), Expr::Call(Func::Min, vec![int(5), int(4)])])
        );
        assert_eq!(
            parse_expr("is_none(value) or unwrap(value) <= 4").unwrap(),
            Expr::binary(
                BinOp::Or,
                Expr::unary(UnaryOp::IsNone, Expr::ValueRef),
                Expr::binary(BinOp::Le, Expr::unary(UnaryOp::Unwrap, Expr::ValueRef), int(4))
            )
        );
        assert_eq!(
            parse_expr("field( yarn.nodemanager.container-manager.thread-count )").unwrap(),
            Expr::field("yarn.nodemanager.container-manager.thread-count")
        );
        assert_eq!(
            parse_expr(r#""a\"b" in env.comp_codecs"#).unwrap(),
            Expr::binary(
                BinOp::In,
                Expr::Lit(Literal::Str("a\"b".into())),
                Expr::env("comp_codecs")
            )
        );
    }

    #[test]
    fn syntax_errors_carry_positions() {
        assert_eq!(parse_expr("value +").unwrap_err().pos, 7);
        assert_eq!(parse_expr("value $ 3").unwrap_err().pos, 6);
        assert_eq!(parse_expr("(1 + 2").unwrap_err().pos, 6);
        assert_eq!(parse_expr("1 2").unwrap_err().pos, 2);
        assert!(parse_expr("").is_err());
        assert!(parse_expr("env.").is_err());
        assert!(parse_expr("field()").is_err());
        assert!(parse_expr("unwrap(value, value)").is_err());
        assert!(parse_expr("foo").is_err());
        assert!(parse_expr("\"open").is_err());
        assert!(parse_expr("and").is_err());
    }
}
