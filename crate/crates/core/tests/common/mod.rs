//! Shared generators for the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use num_bigint::BigInt;
use proptest::prelude::*;
use rwtc::expr::{BinOp, Expr, ExprType, Func, Literal, UnaryOp};
use rwtc::model::{BaseValue, Decimal, JavaOpts};

pub const BIN_OPS: [BinOp; 15] = [
    BinOp::Add,
    BinOp::Sub,
    BinOp::Mul,
    BinOp::Div,
    BinOp::Mod,
    BinOp::Lt,
    BinOp::Le,
    BinOp::Gt,
    BinOp::Ge,
    BinOp::Eq,
    BinOp::Ne,
    BinOp::And,
    BinOp::Or,
    BinOp::In,
    BinOp::Implies,
];

const UNARY_OPS: [UnaryOp; 5] = [
    UnaryOp::Not,
    UnaryOp::Neg,
    UnaryOp::IsSome,
    UnaryOp::IsNone,
    UnaryOp::Unwrap,
];

const ENV_NAMES: [&str; 8] = [
    "phys_cpu_cores",
    "virt_cpu_cores",
    "phys_mem_mb",
    "virt_mem_mb",
    "hw_page_size",
    "max_file_desc",
    "max_threads",
    "comp_codecs",
];

fn decimal_text() -> impl Strategy<Value = String> {
    (any::<bool>(), 0u32..100_000, 0u32..1000).prop_map(|(neg, i, f)| {
        format!("{}{i}.{f}", if neg { "-" } else { "" })
    })
}

pub fn literal() -> impl Strategy<Value = Literal> {
    prop_oneof![
        any::<i64>().prop_map(|n| Literal::Int(BigInt::from(n))),
        "[0-9]{19,30}".prop_map(|s| Literal::Int(s.parse().unwrap())),
        decimal_text().prop_map(|t| Literal::Float(Decimal::parse(&t).unwrap())),
        any::<bool>().prop_map(Literal::Bool),
        "[a-zA-Z0-9 \"\\\\\n\t.,|()-]{0,12}".prop_map(Literal::Str),
    ]
}

pub fn field_name() -> impl Strategy<Value = String> {
    "[a-z][a-z0-9_-]{0,5}(\\.[a-z0-9_-]{1,5}){0,3}"
}

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        literal().prop_map(Expr::Lit),
        Just(Expr::ValueRef),
        field_name().prop_map(Expr::FieldRef),
        prop::sample::select(&ENV_NAMES[..]).prop_map(Expr::env),
    ]
}

/// Arbitrary trees, typed or not, for syntax round trips.
pub fn any_expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(6, 64, 3, |inner| {
        prop_oneof![
            (prop::sample::select(&UNARY_OPS[..]), inner.clone())
                .prop_map(|(op, e)| Expr::unary(op, e)),
            (prop::sample::select(&BIN_OPS[..]), inner.clone(), inner.clone())
                .prop_map(|(op, l, r)| Expr::binary(op, l, r)),
            (
                prop::sample::select(&[Func::Min, Func::Max][..]),
                prop::collection::vec(inner.clone(), 2..4)
            )
                .prop_map(|(f, args)| Expr::Call(f, args)),
            (
                prop::sample::select(&[Func::Len, Func::InitHeap, Func::MaxHeap][..]),
                inner
            )
                .prop_map(|(f, a)| Expr::Call(f, vec![a])),
        ]
    })
}

/// Field names and types visible to [`typed_expr`].
pub fn typed_fields() -> BTreeMap<String, ExprType> {
    [
        ("i.a", ExprType::Int),
        ("i.b", ExprType::Int),
        ("f.x", ExprType::Float),
        ("s.q", ExprType::Str),
        ("b.u", ExprType::Bool),
        ("o.m", ExprType::OptInt),
        ("j.h", ExprType::JavaOpts),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

/// Random lifted values for the fields of [`typed_fields`].
pub fn typed_view() -> impl Strategy<Value = BTreeMap<String, BaseValue>> {
    (
        -50i64..50,
        1i64..1000,
        decimal_text(),
        "[a-zA-Z.]{0,6}",
        any::<bool>(),
        prop::option::of(1i64..10),
        (1u64..2048, 0u64..2048),
    )
        .prop_map(|(a, b, x, q, u, m, (init, extra))| {
            let mut v = BTreeMap::new();
            v.insert("i.a".to_string(), BaseValue::Int(BigInt::from(a)));
            v.insert("i.b".to_string(), BaseValue::pos(b).unwrap());
            v.insert("f.x".to_string(), BaseValue::Float(Decimal::parse(&x).unwrap()));
            v.insert("s.q".to_string(), BaseValue::Str(q));
            v.insert("b.u".to_string(), BaseValue::Bool(u));
            v.insert("o.m".to_string(), BaseValue::opt_pos(m).unwrap());
            v.insert(
                "j.h".to_string(),
                BaseValue::Jvm(JavaOpts::new(init, init + extra, Vec::new()).unwrap()),
            );
            v
        })
}

fn field_of(t: ExprType) -> Vec<Expr> {
    typed_fields()
        .into_iter()
        .filter(|(_, ft)| *ft == t)
        .map(|(n, _)| Expr::FieldRef(n))
        .collect()
}

fn int_leaf() -> BoxedStrategy<Expr> {
    let mut options: Vec<BoxedStrategy<Expr>> = vec![
        (-20i64..20).prop_map(Expr::int).boxed(),
        prop::sample::select(&ENV_NAMES[..7]).prop_map(Expr::env).boxed(),
        Just(Expr::ValueRef).boxed(),
    ];
    for f in field_of(ExprType::Int) {
        options.push(Just(f).boxed());
    }
    prop::strategy::Union::new(options).boxed()
}

fn typed_leaf(t: ExprType) -> BoxedStrategy<Expr> {
    match t {
        ExprType::Int => int_leaf(),
        ExprType::Float => prop_oneof![
            decimal_text().prop_map(|s| Expr::Lit(Literal::Float(Decimal::parse(&s).unwrap()))),
            Just(Expr::field("f.x")),
        ]
        .boxed(),
        ExprType::Bool => prop_oneof![
            any::<bool>().prop_map(|b| Expr::Lit(Literal::Bool(b))),
            Just(Expr::field("b.u")),
        ]
        .boxed(),
        ExprType::Str => prop_oneof![
            "[a-zA-Z.]{0,6}".prop_map(|s| Expr::Lit(Literal::Str(s))),
            Just(Expr::field("s.q")),
            Just(Expr::Lit(Literal::Str(
                "org.apache.hadoop.io.compress.GzipCodec".into()
            ))),
        ]
        .boxed(),
        ExprType::OptInt => Just(Expr::field("o.m")).boxed(),
        ExprType::StrList => Just(Expr::env("comp_codecs")).boxed(),
        ExprType::JavaOpts => Just(Expr::field("j.h")).boxed(),
    }
}

/// Well-typed trees of type `t`, with `value` bound to an integer.
pub fn typed_expr(t: ExprType, depth: u32) -> BoxedStrategy<Expr> {
    if depth == 0 {
        return typed_leaf(t);
    }
    let sub = |t| typed_expr(t, depth - 1);
    let numeric = || prop_oneof![sub(ExprType::Int), sub(ExprType::Float)];
    match t {
        ExprType::Int => prop_oneof![
            typed_leaf(ExprType::Int),
            (
                prop::sample::select(&[BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Mod][..]),
                sub(ExprType::Int),
                sub(ExprType::Int)
            )
                .prop_map(|(op, l, r)| Expr::binary(op, l, r)),
            sub(ExprType::Int).prop_map(|e| Expr::unary(UnaryOp::Neg, e)),
            (prop::sample::select(&[Func::Min, Func::Max][..]), prop::collection::vec(sub(ExprType::Int), 2..4))
                .prop_map(|(f, a)| Expr::Call(f, a)),
            prop_oneof![sub(ExprType::Str), sub(ExprType::StrList)]
                .prop_map(|e| Expr::Call(Func::Len, vec![e])),
            sub(ExprType::OptInt).prop_map(|e| Expr::unary(UnaryOp::Unwrap, e)),
            (prop::sample::select(&[Func::InitHeap, Func::MaxHeap][..]), sub(ExprType::JavaOpts))
                .prop_map(|(f, e)| Expr::Call(f, vec![e])),
        ]
        .boxed(),
        ExprType::Float => prop_oneof![
            typed_leaf(ExprType::Float),
            (
                prop::sample::select(&[BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div][..]),
                sub(ExprType::Float),
                numeric()
            )
                .prop_map(|(op, l, r)| Expr::binary(op, l, r)),
            sub(ExprType::Float).prop_map(|e| Expr::unary(UnaryOp::Neg, e)),
            (sub(ExprType::Int), sub(ExprType::Float)).prop_map(|(a, b)| Expr::Call(Func::Max, vec![a, b])),
        ]
        .boxed(),
        ExprType::Bool => prop_oneof![
            typed_leaf(ExprType::Bool),
            (
                prop::sample::select(&[BinOp::Lt, BinOp::Le, BinOp::Gt, BinOp::Ge, BinOp::Eq, BinOp::Ne][..]),
                numeric(),
                numeric()
            )
                .prop_map(|(op, l, r)| Expr::binary(op, l, r)),
            (
                prop::sample::select(&[BinOp::And, BinOp::Or, BinOp::Implies, BinOp::Eq][..]),
                sub(ExprType::Bool),
                sub(ExprType::Bool)
            )
                .prop_map(|(op, l, r)| Expr::binary(op, l, r)),
            sub(ExprType::Bool).prop_map(|e| Expr::unary(UnaryOp::Not, e)),
            (sub(ExprType::Str), sub(ExprType::StrList)).prop_map(|(l, r)| Expr::binary(BinOp::In, l, r)),
            (sub(ExprType::Str), sub(ExprType::Str)).prop_map(|(l, r)| Expr::binary(BinOp::Ne, l, r)),
            (prop::sample::select(&[UnaryOp::IsSome, UnaryOp::IsNone][..]), sub(ExprType::OptInt))
                .prop_map(|(op, e)| Expr::unary(op, e)),
        ]
        .boxed(),
        other => typed_leaf(other),
    }
}

/// A five-field schema small enough to enumerate exhaustively.
pub const DESK_MANIFEST: &str = r#"
[schema]
name = desk

[fields]
io.file.buffer.size|core|pos|value mod env.hw_page_size == 0|bytes|||4096|||false
mapreduce.jobtracker.maxtasks.perjob|mapred|optpos|true|tasks|||-1||-1|false
mapreduce.input.fileinputformat.split.minsize|mapred|nonneg|true|bytes|||0|||false
mapreduce.input.fileinputformat.split.maxsize|mapred|pos|true|bytes|||268435456|||false
mapreduce.map.output.compress.codec|mapred|str|value in env.comp_codecs|class|||org.apache.hadoop.io.compress.DefaultCodec|||false

[cross]
maxsplit_gt_minsplit|field(mapreduce.input.fileinputformat.split.maxsize) > field(mapreduce.input.fileinputformat.split.minsize)|
"#;

/// Six raw candidates per desk field, valid and invalid mixed.
pub fn desk_candidates() -> Vec<(&'static str, Vec<&'static str>)> {
    vec![
        ("io.file.buffer.size", vec!["4096", "65536", "65537", "0", "-4096", "64k"]),
        ("mapreduce.jobtracker.maxtasks.perjob", vec!["-1", "0", "1", "2", "3", "4"]),
        ("mapreduce.input.fileinputformat.split.minsize", vec!["0", "10", "1000", "-5", "1e3", "268435456"]),
        ("mapreduce.input.fileinputformat.split.maxsize", vec!["10", "1000", "268435456", "0", "1.5", "134217728"]),
        (
            "mapreduce.map.output.compress.codec",
            vec![
                "org.apache.hadoop.io.compress.DefaultCodec",
                "org.apache.hadoop.io.compress.GzipCodec",
                "org.apache.hadoop.io.compress.SnappyCodec",
                "",
                "gzip",
                "org.apache.hadoop.io.compress.Lz4Codec",
            ],
        ),
    ]
}

/// Direct reading of the desk constraints under the reference environment,
/// written without the library's lifting or evaluator.
pub fn desk_oracle(c: &BTreeMap<&str, &str>) -> bool {
    let int = |k: &str| c[k].parse::<i128>().ok();
    let codecs = [
        "org.apache.hadoop.io.compress.DefaultCodec",
        "org.apache.hadoop.io.compress.GzipCodec",
        "org.apache.hadoop.io.compress.BZip2Codec",
        "org.apache.hadoop.io.compress.Lz4Codec",
    ];
    let buffer_ok = matches!(int("io.file.buffer.size"), Some(n) if n >= 1 && n % 4096 == 0);
    let maxtasks_ok = c["mapreduce.jobtracker.maxtasks.perjob"] == "-1"
        || matches!(int("mapreduce.jobtracker.maxtasks.perjob"), Some(n) if n >= 1);
    let min = int("mapreduce.input.fileinputformat.split.minsize").filter(|n| *n >= 0);
    let max = int("mapreduce.input.fileinputformat.split.maxsize").filter(|n| *n >= 1);
    let split_ok = matches!((min, max), (Some(lo), Some(hi)) if hi > lo);
    let codec_ok = codecs.contains(&c["mapreduce.map.output.compress.codec"]);
    buffer_ok && maxtasks_ok && split_ok && codec_ok
}

/// Every combination of the desk candidates, in odometer order.
pub fn desk_combinations() -> Vec<BTreeMap<&'static str, &'static str>> {
    let fields = desk_candidates();
    let mut out = vec![BTreeMap::new()];
    for (name, cands) in fields {
        out = out
            .into_iter()
            .flat_map(|partial| {
                cands.iter().map(move |v| {
                    let mut next = partial.clone();
                    next.insert(name, *v);
                    next
                })
            })
            .collect();
    }
    out
}
