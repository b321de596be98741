//! Lift-and-prove: raw strings become typed values whose properties and
//! cross-field constraints are evaluated under an [`Environment`].

mod report;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use sha2::{Digest, Sha256};

use crate::env::Environment;
use crate::expr::{eval_expr, Value};
use crate::model::{
    is_one_or_more, parse_decimal_int, parse_java_opts, render_base_value,
    BaseValue, Decimal, Diagnostic, DiagnosticKind, NonNegInt, PosInt, RTipe, RawConfig, RawEntry,
};
use crate::schema::{ConfigSchema, FieldSpec};

pub use report::{render_machine, render_text};

/// Constraint ids used for per-field diagnostics.
pub const LIFT_ID: &str = "lift";
pub const PROPERTY_ID: &str = "property";
pub const REQUIRED_ID: &str = "required";
pub const SCHEMA_ID: &str = "schema";

fn lift_failure(raw: &str, spec: &FieldSpec, reason: &str) -> Diagnostic {
    Diagnostic::for_field(
        DiagnosticKind::LiftFailure,
        &spec.name,
        LIFT_ID,
        format!("cannot lift `{raw}` to {}: {reason}", spec.tipe),
    )
}

/// Lifts a raw string to the field's base type.
pub fn lift_value(raw: &str, spec: &FieldSpec) -> Result<BaseValue, Diagnostic> {
    let fail = |reason: &str| lift_failure(raw, spec, reason);
    let int = || parse_decimal_int(raw).ok_or_else(|| fail("not a decimal integer"));
    match spec.tipe {
        RTipe::Int => int().map(BaseValue::Int),
        RTipe::Pos => {
            let n = int()?;
            PosInt::new(n)
                .map(BaseValue::Pos)
                .ok_or_else(|| fail("must be at least 1"))
        }
        RTipe::NonNeg => {
            let n = int()?;
            NonNegInt::new(n)
                .map(BaseValue::NonNeg)
                .ok_or_else(|| fail("must not be negative"))
        }
        RTipe::Bool => match raw {
            "true" => Ok(BaseValue::Bool(true)),
            "false" => Ok(BaseValue::Bool(false)),
            _ => Err(fail("expected `true` or `false`")),
        },
        RTipe::Float => Decimal::parse(raw)
            .map(BaseValue::Float)
            .map_err(|e| fail(&e.to_string())),
        RTipe::Str => Ok(BaseValue::Str(raw.to_string())),
        RTipe::JavaOpts => parse_java_opts(raw)
            .map(BaseValue::Jvm)
            .map_err(|e| fail(&e.to_string())),
        RTipe::OptionPos => {
            if spec.none_sentinels.iter().any(|s| s == raw) {
                return Ok(BaseValue::OptPos(None));
            }
            match parse_decimal_int(raw) {
                Some(n) if is_one_or_more(&n) => Ok(BaseValue::OptPos(PosInt::new(n))),
                Some(_) => Err(fail(&format!(
                    "neither a positive limit nor a none sentinel ({})",
                    spec.none_sentinels.join(", ")
                ))),
                None => Err(fail("not a decimal integer")),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evidence {
    pub property_source: String,
    pub evaluated_true: bool,
    pub env_fingerprint: String,
}

/// A value whose property held. Only [`check_field`] constructs one.
#[derive(Debug, Clone, PartialEq)]
pub struct CertifiedField {
    field_id: String,
    is_final: bool,
    value: BaseValue,
    evidence: Evidence,
}

impl CertifiedField {
    pub fn field_id(&self) -> &str {
        &self.field_id
    }

    pub fn is_final(&self) -> bool {
        self.is_final
    }

    pub fn value(&self) -> &BaseValue {
        &self.value
    }

    pub fn evidence(&self) -> &Evidence {
        &self.evidence
    }
}

/// Lifts `raw` and evaluates the field property with `value` bound to it.
pub fn check_field(
    spec: &FieldSpec,
    raw: &str,
    is_final: bool,
    env: &Environment,
) -> Result<CertifiedField, Vec<Diagnostic>> {
    let value = lift_value(raw, spec).map_err(|d| vec![d])?;
    let violation = |message: String| {
        vec![Diagnostic::for_field(
            DiagnosticKind::PropertyViolation,
            &spec.name,
            PROPERTY_ID,
            message,
        )]
    };
    match eval_expr(&spec.property, Some(&value), &(), env) {
        Ok(Value::Bool(true)) => Ok(CertifiedField {
            field_id: spec.name.clone(),
            is_final,
            value,
            evidence: Evidence {
                property_source: spec.property.to_string(),
                evaluated_true: true,
                env_fingerprint: env.fingerprint(),
            },
        }),
        Ok(Value::Bool(false)) => Err(violation(format!(
            "`{raw}` violates `{}`",
            spec.property
        ))),
        Ok(other) => Err(violation(format!(
            "property `{}` produced {other:?} instead of a boolean",
            spec.property
        ))),
        Err(e) => Err(violation(format!(
            "evaluating `{}` on `{raw}` failed: {e}",
            spec.property
        ))),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossEvidence {
    pub constraint_id: String,
    pub evaluated_true: bool,
}

/// A configuration in which every field lifted, every property held and
/// every cross-constraint held.
#[derive(Debug, Clone, PartialEq)]
pub struct CertifiedConfig {
    schema_name: String,
    fields: BTreeMap<String, CertifiedField>,
    cross_evidence: Vec<CrossEvidence>,
    environment: Environment,
}

impl CertifiedConfig {
    pub fn schema_name(&self) -> &str {
        &self.schema_name
    }

    pub fn fields(&self) -> &BTreeMap<String, CertifiedField> {
        &self.fields
    }

    pub fn cross_evidence(&self) -> &[CrossEvidence] {
        &self.cross_evidence
    }

    pub fn environment(&self) -> &Environment {
        &self.environment
    }

    /// Renders the certified values back to raw strings. An absent
    /// option-positive value is rendered as the field's first sentinel.
    pub fn to_raw_config(&self, schema: &ConfigSchema) -> RawConfig {
        let mut raw = RawConfig::new();
        for (name, f) in &self.fields {
            let text = match (&f.value, schema.field(name)) {
                (BaseValue::OptPos(None), Some(spec)) => spec.none_sentinels[0].clone(),
                (v, _) => render_base_value(v),
            };
            let mut entry = RawEntry::new(text);
            entry.is_final = f.is_final;
            raw.insert(name.clone(), entry);
        }
        raw
    }

    /// Runs the rendered values through the checker again under the stored
    /// environment.
    pub fn recheck(&self, schema: &ConfigSchema) -> CheckReport {
        check_config(schema, &self.to_raw_config(schema), &self.environment)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Pass(Box<CertifiedConfig>),
    /// The hard diagnostics; never empty.
    Fail(Vec<Diagnostic>),
}

#[derive(Debug, Clone)]
pub struct CheckReport {
    /// Short content hash of the raw values that were checked.
    pub config_id: String,
    pub outcome: Outcome,
    /// Every diagnostic, warnings included, in report order.
    pub diagnostics: Vec<Diagnostic>,
    pub counts: BTreeMap<DiagnosticKind, usize>,
    pub check_duration: Duration,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        matches!(self.outcome, Outcome::Pass(_))
    }

    pub fn certified(&self) -> Option<&CertifiedConfig> {
        match &self.outcome {
            Outcome::Pass(c) => Some(c),
            Outcome::Fail(_) => None,
        }
    }

    pub fn hard_count(&self) -> usize {
        self.diagnostics.iter().filter(|d| d.kind.is_hard()).count()
    }

    pub fn warning_count(&self) -> usize {
        self.diagnostics.len() - self.hard_count()
    }

    /// Puts diagnostics from an earlier stage (such as merging site files)
    /// ahead of the checker's own. Warnings keep a passing report passing.
    pub fn prepend_diagnostics(&mut self, earlier: Vec<Diagnostic>) {
        let hard: Vec<Diagnostic> = earlier.iter().filter(|d| d.kind.is_hard()).cloned().collect();
        for d in &earlier {
            *self.counts.entry(d.kind).or_default() += 1;
        }
        let mut all = earlier;
        all.append(&mut self.diagnostics);
        self.diagnostics = all;
        if !hard.is_empty() {
            self.outcome = Outcome::Fail(self.diagnostics.iter().filter(|d| d.kind.is_hard()).cloned().collect());
        }
    }
}

fn config_id(raw: &RawConfig) -> String {
    let mut h = Sha256::new();
    for (k, v) in raw.values() {
        h.update(k.as_bytes());
        h.update([0]);
        h.update(v.as_bytes());
        h.update([0]);
    }
    h.finalize()[..6].iter().map(|b| format!("{b:02x}")).collect()
}

/// Checks a whole configuration and collects every diagnostic.
///
/// Fields missing from `raw` fall back to their default. Diagnostics come in
/// schema order, then cross-constraint order, then unknown-field warnings.
pub fn check_config(schema: &ConfigSchema, raw: &RawConfig, env: &Environment) -> CheckReport {
    let start = Instant::now();
    let mut diagnostics = Vec::new();
    let mut certified = BTreeMap::new();

    for spec in schema.fields() {
        let (text, is_final) = match raw.get(&spec.name) {
            Some(e) => (e.raw_value.as_str(), e.is_final),
            None => match &spec.default_raw {
                Some(d) => (d.as_str(), false),
                None => {
                    if spec.required {
                        diagnostics.push(Diagnostic::for_field(
                            DiagnosticKind::MissingField,
                            &spec.name,
                            REQUIRED_ID,
                            "required field has no value and no default",
                        ));
                    }
                    continue;
                }
            },
        };
        match check_field(spec, text, is_final, env) {
            Ok(c) => {
                certified.insert(spec.name.clone(), c);
            }
            Err(mut ds) => diagnostics.append(&mut ds),
        }
    }

    let view: BTreeMap<String, BaseValue> = certified
        .iter()
        .map(|(k, c)| (k.clone(), c.value.clone()))
        .collect();
    let mut cross_evidence = Vec::new();
    for c in schema.cross_constraints() {
        let unresolved: Vec<&str> = c
            .expr
            .field_refs()
            .into_iter()
            .filter(|f| !view.contains_key(*f))
            .collect();
        if !unresolved.is_empty() {
            diagnostics.push(Diagnostic::cross(
                &c.id,
                format!("unresolved: {}", unresolved.join(", ")),
            ));
            continue;
        }
        match eval_expr(&c.expr, None, &view, env) {
            Ok(Value::Bool(true)) => cross_evidence.push(CrossEvidence {
                constraint_id: c.id.clone(),
                evaluated_true: true,
            }),
            Ok(_) => diagnostics.push(Diagnostic::cross(&c.id, format!("`{}` does not hold", c.expr))),
            Err(e) => diagnostics.push(Diagnostic::cross(
                &c.id,
                format!("evaluating `{}` failed: {e}", c.expr),
            )),
        }
    }

    for name in raw.entries.keys() {
        if schema.field(name).is_none() {
            diagnostics.push(Diagnostic::for_field(
                DiagnosticKind::UnknownField,
                name,
                SCHEMA_ID,
                "not described by the schema; left unchecked",
            ));
        }
    }

    let mut counts = BTreeMap::new();
    for d in &diagnostics {
        *counts.entry(d.kind).or_insert(0) += 1;
    }
    let hard: Vec<Diagnostic> = diagnostics.iter().filter(|d| d.kind.is_hard()).cloned().collect();
    let outcome = if hard.is_empty() {
        Outcome::Pass(Box::new(CertifiedConfig {
            schema_name: schema.name().to_string(),
            fields: certified,
            cross_evidence,
            environment: env.clone(),
        }))
    } else {
        Outcome::Fail(hard)
    };
    CheckReport {
        config_id: config_id(raw),
        outcome,
        diagnostics,
        counts,
        check_duration: start.elapsed(),
    }
}
