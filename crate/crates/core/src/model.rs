//! Base-type vocabulary shared by every other module: base-type tags, lifted
//! values, the JVM options record, raw configurations and diagnostics.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed};
use serde::Serialize;
use thiserror::Error;

pub use crate::env::Environment;

/// Tolerance used whenever two floating values are compared.
pub const FLOAT_TOLERANCE: f64 = 1e-9;

/// Tag designating the base type a raw value is lifted into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum RTipe {
    Int,
    Pos,
    NonNeg,
    Str,
    Bool,
    Float,
    JavaOpts,
    OptionPos,
}

impl RTipe {
    pub const ALL: [RTipe; 8] = [
        RTipe::Int,
        RTipe::Pos,
        RTipe::NonNeg,
        RTipe::Str,
        RTipe::Bool,
        RTipe::Float,
        RTipe::JavaOpts,
        RTipe::OptionPos,
    ];

    /// Short tag used in manifests and explanations.
    pub fn tag(self) -> &'static str {
        match self {
            RTipe::Int => "int",
            RTipe::Pos => "pos",
            RTipe::NonNeg => "nonneg",
            RTipe::Str => "str",
            RTipe::Bool => "bool",
            RTipe::Float => "float",
            RTipe::JavaOpts => "javaopts",
            RTipe::OptionPos => "optpos",
        }
    }

    pub fn is_integral(self) -> bool {
        matches!(self, RTipe::Int | RTipe::Pos | RTipe::NonNeg)
    }
}

impl fmt::Display for RTipe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown base-type tag `{0}`")]
pub struct UnknownTipe(pub String);

impl FromStr for RTipe {
    type Err = UnknownTipe;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RTipe::ALL
            .into_iter()
            .find(|t| t.tag() == s)
            .ok_or_else(|| UnknownTipe(s.to_string()))
    }
}

/// Strictly positive arbitrary-precision integer.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PosInt(BigInt);

impl PosInt {
    pub fn new(n: BigInt) -> Option<Self> {
        n.is_positive().then_some(PosInt(n))
    }

    pub fn get(&self) -> &BigInt {
        &self.0
    }
}

impl From<std::num::NonZeroU64> for PosInt {
    fn from(n: std::num::NonZeroU64) -> Self {
        PosInt(BigInt::from(n.get()))
    }
}

/// Non-negative arbitrary-precision integer.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NonNegInt(BigInt);

impl NonNegInt {
    pub fn new(n: BigInt) -> Option<Self> {
        (!n.is_negative()).then_some(NonNegInt(n))
    }

    pub fn get(&self) -> &BigInt {
        &self.0
    }
}

/// A decimal number that remembers the text it was written as.
///
/// Comparisons go through the `f64` approximation with [`FLOAT_TOLERANCE`];
/// rendering always reproduces the original text.
#[derive(Debug, Clone)]
pub struct Decimal {
    text: String,
    value: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("`{0}` is not a decimal literal")]
pub struct BadDecimal(pub String);

impl Decimal {
    pub fn parse(s: &str) -> Result<Self, BadDecimal> {
        let bad = || BadDecimal(s.to_string());
        let body = s.strip_prefix(['+', '-']).unwrap_or(s);
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, Some(f)),
            None => (body, None),
        };
        let digits = |p: &str| p.bytes().all(|b| b.is_ascii_digit());
        let ok = digits(int_part)
            && frac_part.is_none_or(digits)
            && (!int_part.is_empty() || frac_part.is_some_and(|f| !f.is_empty()));
        if !ok {
            return Err(bad());
        }
        let value: f64 = s.parse().map_err(|_| bad())?;
        if !value.is_finite() {
            return Err(bad());
        }
        Ok(Decimal {
            text: s.to_string(),
            value,
        })
    }

    pub fn from_f64(value: f64) -> Self {
        // Shortest representation that round-trips, with a decimal point so
        // the text re-lexes as a float.
        let mut text = format!("{value}");
        if !text.contains(['.', 'e', 'E', 'i', 'N']) {
            text.push_str(".0");
        }
        Decimal { text, value }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn text(&self) -> &str {
        &self.text
    }
}

impl PartialEq for Decimal {
    fn eq(&self, other: &Self) -> bool {
        (self.value - other.value).abs() <= FLOAT_TOLERANCE
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

/// JVM options reduced to their initial and maximum heap sizes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct JavaOpts {
    init_heap_mb: u64,
    max_heap_mb: u64,
    extra_flags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JavaOptsError {
    #[error("missing {0} flag")]
    Missing(&'static str),
    #[error("duplicate {0} flag")]
    Duplicate(&'static str),
    #[error("malformed heap size in `{0}`")]
    MalformedSize(String),
    #[error("unknown heap size unit in `{0}`")]
    UnknownUnit(String),
    #[error("heap sizes must be at least 1 MB")]
    ZeroSize,
    #[error("initial heap {init}m exceeds maximum heap {max}m")]
    InitExceedsMax { init: u64, max: u64 },
    #[error("extra flag `{0}` sets a heap size")]
    HeapFlagInExtras(String),
}

impl JavaOpts {
    pub fn new(
        init_heap_mb: u64,
        max_heap_mb: u64,
        extra_flags: Vec<String>,
    ) -> Result<Self, JavaOptsError> {
        if init_heap_mb == 0 || max_heap_mb == 0 {
            return Err(JavaOptsError::ZeroSize);
        }
        if init_heap_mb > max_heap_mb {
            return Err(JavaOptsError::InitExceedsMax {
                init: init_heap_mb,
                max: max_heap_mb,
            });
        }
        if let Some(flag) = extra_flags
            .iter()
            .find(|f| f.starts_with("-Xms") || f.starts_with("-Xmx"))
        {
            return Err(JavaOptsError::HeapFlagInExtras(flag.clone()));
        }
        Ok(JavaOpts {
            init_heap_mb,
            max_heap_mb,
            extra_flags,
        })
    }

    pub fn init_heap_mb(&self) -> u64 {
        self.init_heap_mb
    }

    pub fn max_heap_mb(&self) -> u64 {
        self.max_heap_mb
    }

    pub fn extra_flags(&self) -> &[String] {
        &self.extra_flags
    }
}

/// Parses a JVM options string such as `-Xms1024m -Xmx4096m`.
///
/// Exactly one `-Xms` and one `-Xmx` token are required. Sizes take a
/// `k`, `m` or `g` suffix (either case) and are normalized to megabytes,
/// rounding kilobytes up. Every other token is kept verbatim, in order.
pub fn parse_java_opts(raw: &str) -> Result<JavaOpts, JavaOptsError> {
    let mut init = None;
    let mut max = None;
    let mut extra = Vec::new();
    for token in raw.split_whitespace() {
        let (slot, name, rest) = if let Some(rest) = token.strip_prefix("-Xms") {
            (&mut init, "-Xms", rest)
        } else if let Some(rest) = token.strip_prefix("-Xmx") {
            (&mut max, "-Xmx", rest)
        } else {
            extra.push(token.to_string());
            continue;
        };
        if slot.is_some() {
            return Err(JavaOptsError::Duplicate(name));
        }
        *slot = Some(heap_size_mb(token, rest)?);
    }
    let init = init.ok_or(JavaOptsError::Missing("-Xms"))?;
    let max = max.ok_or(JavaOptsError::Missing("-Xmx"))?;
    JavaOpts::new(init, max, extra)
}

fn heap_size_mb(token: &str, spec: &str) -> Result<u64, JavaOptsError> {
    let split = spec
        .find(|c: char| !c.is_ascii_digit())
        .unwrap_or(spec.len());
    let (digits, unit) = spec.split_at(split);
    if digits.is_empty() {
        return Err(JavaOptsError::MalformedSize(token.to_string()));
    }
    let n: u64 = digits
        .parse()
        .map_err(|_| JavaOptsError::MalformedSize(token.to_string()))?;
    if n == 0 {
        return Err(JavaOptsError::MalformedSize(token.to_string()));
    }
    let mb = match unit {
        "k" | "K" => n.div_ceil(1024),
        "m" | "M" => n,
        "g" | "G" => n
            .checked_mul(1024)
            .ok_or_else(|| JavaOptsError::MalformedSize(token.to_string()))?,
        _ => return Err(JavaOptsError::UnknownUnit(token.to_string())),
    };
    Ok(mb)
}

/// A lifted value of one of the eight base types.
#[derive(Debug, Clone, PartialEq)]
pub enum BaseValue {
    Int(BigInt),
    Pos(PosInt),
    NonNeg(NonNegInt),
    Str(String),
    Bool(bool),
    Float(Decimal),
    Jvm(JavaOpts),
    OptPos(Option<PosInt>),
}

impl BaseValue {
    pub fn tipe(&self) -> RTipe {
        match self {
            BaseValue::Int(_) => RTipe::Int,
            BaseValue::Pos(_) => RTipe::Pos,
            BaseValue::NonNeg(_) => RTipe::NonNeg,
            BaseValue::Str(_) => RTipe::Str,
            BaseValue::Bool(_) => RTipe::Bool,
            BaseValue::Float(_) => RTipe::Float,
            BaseValue::Jvm(_) => RTipe::JavaOpts,
            BaseValue::OptPos(_) => RTipe::OptionPos,
        }
    }

    pub fn pos(n: impl Into<BigInt>) -> Option<Self> {
        PosInt::new(n.into()).map(BaseValue::Pos)
    }

    pub fn non_neg(n: impl Into<BigInt>) -> Option<Self> {
        NonNegInt::new(n.into()).map(BaseValue::NonNeg)
    }

    pub fn opt_pos(n: Option<impl Into<BigInt>>) -> Option<Self> {
        match n {
            None => Some(BaseValue::OptPos(None)),
            Some(n) => PosInt::new(n.into()).map(|p| BaseValue::OptPos(Some(p))),
        }
    }
}

/// Canonical text for a lifted value.
///
/// `OptPos(None)` renders as `none`; the field-specific sentinel is applied
/// by the checker, which knows the field.
pub fn render_base_value(v: &BaseValue) -> String {
    match v {
        BaseValue::Int(i) => i.to_string(),
        BaseValue::Pos(p) => p.get().to_string(),
        BaseValue::NonNeg(n) => n.get().to_string(),
        BaseValue::Str(s) => s.clone(),
        BaseValue::Bool(b) => b.to_string(),
        BaseValue::Float(d) => d.to_string(),
        BaseValue::Jvm(j) => {
            let mut out = format!("-Xms{}m -Xmx{}m", j.init_heap_mb, j.max_heap_mb);
            for flag in &j.extra_flags {
                out.push(' ');
                out.push_str(flag);
            }
            out
        }
        BaseValue::OptPos(None) => "none".to_string(),
        BaseValue::OptPos(Some(p)) => p.get().to_string(),
    }
}

impl fmt::Display for BaseValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_base_value(self))
    }
}

/// Parses a plain decimal integer with an optional sign. No whitespace.
pub(crate) fn parse_decimal_int(s: &str) -> Option<BigInt> {
    let body = s.strip_prefix(['+', '-']).unwrap_or(s);
    if body.is_empty() || !body.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    BigInt::parse_bytes(s.as_bytes(), 10)
}

pub(crate) fn is_one_or_more(n: &BigInt) -> bool {
    n >= &BigInt::one()
}

/// Where a raw entry came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Source {
    pub path: PathBuf,
    /// Zero-based position of the property within its file.
    pub ordinal: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RawEntry {
    pub raw_value: String,
    #[serde(rename = "final")]
    pub is_final: bool,
    pub source: Option<Source>,
}

impl RawEntry {
    pub fn new(raw_value: impl Into<String>) -> Self {
        RawEntry {
            raw_value: raw_value.into(),
            is_final: false,
            source: None,
        }
    }
}

/// Machine-level configuration prior to lifting, keyed by dotted field name.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct RawConfig {
    pub entries: BTreeMap<String, RawEntry>,
}

impl RawConfig {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, entry: RawEntry) -> Option<RawEntry> {
        self.entries.insert(name.into(), entry)
    }

    pub fn set(&mut self, name: impl Into<String>, raw: impl Into<String>) {
        self.entries.insert(name.into(), RawEntry::new(raw));
    }

    pub fn get(&self, name: &str) -> Option<&RawEntry> {
        self.entries.get(name)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Name to raw value, dropping provenance.
    pub fn values(&self) -> BTreeMap<&str, &str> {
        self.entries
            .iter()
            .map(|(k, e)| (k.as_str(), e.raw_value.as_str()))
            .collect()
    }
}

impl<K: Into<String>, V: Into<String>> FromIterator<(K, V)> for RawConfig {
    fn from_iter<I: IntoIterator<Item = (K, V)>>(iter: I) -> Self {
        let mut cfg = RawConfig::new();
        for (k, v) in iter {
            cfg.set(k, v);
        }
        cfg
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum DiagnosticKind {
    LiftFailure,
    PropertyViolation,
    CrossFieldViolation,
    MissingField,
    UnknownField,
    FinalOverride,
}

impl DiagnosticKind {
    pub const ALL: [DiagnosticKind; 6] = [
        DiagnosticKind::LiftFailure,
        DiagnosticKind::PropertyViolation,
        DiagnosticKind::CrossFieldViolation,
        DiagnosticKind::MissingField,
        DiagnosticKind::UnknownField,
        DiagnosticKind::FinalOverride,
    ];

    /// Hard diagnostics make a configuration fail; the rest are warnings.
    pub fn is_hard(self) -> bool {
        !matches!(
            self,
            DiagnosticKind::UnknownField | DiagnosticKind::FinalOverride
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            DiagnosticKind::LiftFailure => "LiftFailure",
            DiagnosticKind::PropertyViolation => "PropertyViolation",
            DiagnosticKind::CrossFieldViolation => "CrossFieldViolation",
            DiagnosticKind::MissingField => "MissingField",
            DiagnosticKind::UnknownField => "UnknownField",
            DiagnosticKind::FinalOverride => "FinalOverride",
        }
    }
}

impl fmt::Display for DiagnosticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub field: Option<String>,
    pub constraint_id: String,
    pub kind: DiagnosticKind,
    pub message: String,
}

impl Diagnostic {
    pub fn for_field(
        kind: DiagnosticKind,
        field: impl Into<String>,
        constraint_id: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        Diagnostic {
            field: Some(field.into()),
            constraint_id: constraint_id.into(),
            kind,
            message: message.into(),
        }
    }

    pub fn cross(constraint_id: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            field: None,
            constraint_id: constraint_id.into(),
            kind: DiagnosticKind::CrossFieldViolation,
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let subject = self.field.as_deref().unwrap_or(&self.constraint_id);
        write!(f, "{}\t{}\t{}", self.kind, subject, self.message)
    }
}
