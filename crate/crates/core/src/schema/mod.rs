//! Field specifications, cross-field constraints and whole-configuration
//! schemas, plus the bundled Hadoop schema.

mod manifest;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::sync::OnceLock;

use thiserror::Error;

use crate::checker::lift_value;
use crate::env::Environment;
use crate::expr::{self, env_types, typecheck_expr, Expr, ExprType, ParseError, TypeError, Value};
use crate::model::{parse_decimal_int, RTipe};

pub use manifest::{parse_manifest, render_manifest};

/// Canonical ordering of the well-known subsystems; others sort after these.
pub const KNOWN_SUBSYSTEMS: [&str; 4] = ["core", "hdfs", "yarn", "mapred"];

#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("cannot read schema manifest {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: in `{text}`: {source}")]
    Expr {
        line: usize,
        text: String,
        #[source]
        source: ParseError,
    },
    #[error("duplicate field `{0}`")]
    DuplicateField(String),
    #[error("duplicate cross-constraint `{0}`")]
    DuplicateConstraint(String),
    #[error("field `{field}`: {message}")]
    BadField { field: String, message: String },
    #[error("field `{field}`: property does not type-check: {source}")]
    PropertyType {
        field: String,
        #[source]
        source: TypeError,
    },
    #[error("cross-constraint `{id}` does not type-check: {source}")]
    CrossType {
        id: String,
        #[source]
        source: TypeError,
    },
    #[error("cross-constraint `{id}` must be boolean, found {found}")]
    CrossNotBool { id: String, found: ExprType },
    #[error("unknown field `{0}`")]
    UnknownField(String),
}

impl SchemaError {
    fn field(field: &str, message: impl Into<String>) -> Self {
        SchemaError::BadField {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

/// Per-field metadata: base type, property, and explanatory text.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSpec {
    pub name: String,
    pub subsystem: String,
    pub tipe: RTipe,
    /// Boolean expression over `value` and `env.*`; never `field(...)`.
    pub property: Expr,
    pub unit: String,
    pub interp: String,
    pub advice: String,
    pub default_raw: Option<String>,
    pub grid_variants: Option<Vec<String>>,
    /// Raw integers that lift to "absent"; only for option-positive fields.
    pub none_sentinels: Vec<String>,
    pub required: bool,
}

impl FieldSpec {
    /// A field with a trivially true property and no metadata.
    pub fn new(name: impl Into<String>, subsystem: impl Into<String>, tipe: RTipe) -> Self {
        FieldSpec {
            name: name.into(),
            subsystem: subsystem.into(),
            tipe,
            property: Expr::Lit(expr::Literal::Bool(true)),
            unit: String::new(),
            interp: String::new(),
            advice: String::new(),
            default_raw: None,
            grid_variants: None,
            none_sentinels: Vec::new(),
            required: false,
        }
    }

    pub fn expr_type(&self) -> ExprType {
        ExprType::of_tipe(self.tipe)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossConstraint {
    pub id: String,
    pub expr: Expr,
    pub description: String,
}

/// A validated schema. Fields are kept in name order, which is the order
/// diagnostics are reported in.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigSchema {
    name: String,
    fields: BTreeMap<String, FieldSpec>,
    cross_constraints: Vec<CrossConstraint>,
    subsystems: Vec<String>,
}

impl ConfigSchema {
    /// Validates and assembles a schema.
    ///
    /// Every property and cross-constraint is type-checked, option-positive
    /// sentinels are checked, and each default must lift and satisfy its
    /// property under the reference environment.
    pub fn new(
        name: impl Into<String>,
        fields: impl IntoIterator<Item = FieldSpec>,
        cross_constraints: Vec<CrossConstraint>,
    ) -> Result<Self, SchemaError> {
        let env_types = env_types();
        let reference = Environment::reference();
        let mut by_name = BTreeMap::new();
        for spec in fields {
            validate_field(&spec, &env_types, &reference)?;
            if by_name.contains_key(&spec.name) {
                return Err(SchemaError::DuplicateField(spec.name));
            }
            by_name.insert(spec.name.clone(), spec);
        }

        let field_types: BTreeMap<String, ExprType> = by_name
            .values()
            .map(|f| (f.name.clone(), f.expr_type()))
            .collect();
        let mut ids = BTreeSet::new();
        for c in &cross_constraints {
            if !ids.insert(c.id.as_str()) {
                return Err(SchemaError::DuplicateConstraint(c.id.clone()));
            }
            let t = typecheck_expr(&c.expr, None, &field_types, &env_types).map_err(|source| {
                SchemaError::CrossType {
                    id: c.id.clone(),
                    source,
                }
            })?;
            if t != ExprType::Bool {
                return Err(SchemaError::CrossNotBool {
                    id: c.id.clone(),
                    found: t,
                });
            }
        }

        let present: BTreeSet<&str> = by_name.values().map(|f| f.subsystem.as_str()).collect();
        let mut subsystems: Vec<String> = KNOWN_SUBSYSTEMS
            .iter()
            .filter(|s| present.contains(*s))
            .map(|s| s.to_string())
            .collect();
        subsystems.extend(
            present
                .iter()
                .filter(|s| !KNOWN_SUBSYSTEMS.contains(s))
                .map(|s| s.to_string()),
        );

        Ok(ConfigSchema {
            name: name.into(),
            fields: by_name,
            cross_constraints,
            subsystems,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn fields(&self) -> impl Iterator<Item = &FieldSpec> {
        self.fields.values()
    }

    pub fn field(&self, name: &str) -> Option<&FieldSpec> {
        self.fields.get(name)
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn cross_constraints(&self) -> &[CrossConstraint] {
        &self.cross_constraints
    }

    pub fn subsystems(&self) -> &[String] {
        &self.subsystems
    }

    /// Fields belonging to one subsystem, in name order.
    pub fn subsystem_fields<'a>(&'a self, subsystem: &'a str) -> impl Iterator<Item = &'a FieldSpec> {
        self.fields().filter(move |f| f.subsystem == subsystem)
    }

    pub fn field_types(&self) -> BTreeMap<String, ExprType> {
        self.fields
            .values()
            .map(|f| (f.name.clone(), f.expr_type()))
            .collect()
    }

    /// Returns a copy with one more cross-constraint, revalidated.
    pub fn with_cross_constraint(&self, c: CrossConstraint) -> Result<Self, SchemaError> {
        let mut cross = self.cross_constraints.clone();
        cross.push(c);
        ConfigSchema::new(self.name.clone(), self.fields.values().cloned(), cross)
    }

    /// Serializes to manifest text that [`parse_manifest`] reads back to an
    /// identical schema.
    pub fn to_manifest(&self) -> String {
        render_manifest(self)
    }
}

fn validate_field(
    spec: &FieldSpec,
    env_types: &BTreeMap<String, ExprType>,
    reference: &Environment,
) -> Result<(), SchemaError> {
    let name = spec.name.as_str();
    if name.is_empty() || !name.chars().all(crate::expr::is_field_name_char) {
        return Err(SchemaError::field(name, "field names use letters, digits, `.`, `_` and `-`"));
    }
    if spec.subsystem.is_empty() {
        return Err(SchemaError::field(name, "subsystem is empty"));
    }
    if !spec.property.field_refs().is_empty() {
        return Err(SchemaError::field(
            name,
            "a field property may not reference other fields; use a cross-constraint",
        ));
    }
    let t = typecheck_expr(&spec.property, Some(spec.expr_type()), &BTreeMap::new(), env_types)
        .map_err(|source| SchemaError::PropertyType {
            field: name.to_string(),
            source,
        })?;
    if t != ExprType::Bool {
        return Err(SchemaError::field(name, format!("property must be boolean, found {t}")));
    }

    match (spec.tipe, spec.none_sentinels.is_empty()) {
        (RTipe::OptionPos, true) => {
            return Err(SchemaError::field(name, "option-positive field needs at least one none sentinel"))
        }
        (RTipe::OptionPos, false) => {}
        (_, false) => {
            return Err(SchemaError::field(name, "none sentinels are only allowed on option-positive fields"))
        }
        (_, true) => {}
    }
    for s in &spec.none_sentinels {
        match parse_decimal_int(s) {
            Some(n) if !crate::model::is_one_or_more(&n) => {}
            Some(_) => {
                return Err(SchemaError::field(
                    name,
                    format!("sentinel `{s}` is positive and would shadow a real limit"),
                ))
            }
            None => return Err(SchemaError::field(name, format!("sentinel `{s}` is not an integer"))),
        }
    }
    if let Some(variants) = &spec.grid_variants {
        if variants.is_empty() {
            return Err(SchemaError::field(name, "grid variant list is empty"));
        }
    }

    if let Some(default) = &spec.default_raw {
        let v = lift_value(default, spec).map_err(|d| {
            SchemaError::field(name, format!("default `{default}` does not lift: {}", d.message))
        })?;
        let holds = expr::eval_expr(&spec.property, Some(&v), &(), reference);
        if holds != Ok(Value::Bool(true)) {
            return Err(SchemaError::field(
                name,
                format!("default `{default}` violates `{}` in the reference environment", spec.property),
            ));
        }
    }
    Ok(())
}

/// Reads and validates a schema manifest file.
pub fn load_schema(manifest_path: &Path) -> Result<ConfigSchema, SchemaError> {
    let text = std::fs::read_to_string(manifest_path).map_err(|source| SchemaError::Io {
        path: manifest_path.display().to_string(),
        source,
    })?;
    let fallback = manifest_path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("schema");
    parse_manifest(&text, fallback)
}

const HADOOP_MANIFEST: &str = include_str!("hadoop.manifest");

/// The embedded Hadoop schema covering core, HDFS, YARN and MapReduce.
pub fn bundled_hadoop_schema() -> ConfigSchema {
    static SCHEMA: OnceLock<ConfigSchema> = OnceLock::new();
    SCHEMA
        .get_or_init(|| parse_manifest(HADOOP_MANIFEST, "hadoop").expect("bundled manifest is valid"))
        .clone()
}

/// Raw text of the bundled manifest.
pub fn bundled_hadoop_manifest() -> &'static str {
    HADOOP_MANIFEST
}

/// Human-facing metadata for one field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldExplanation {
    pub name: String,
    pub subsystem: String,
    pub tipe: RTipe,
    pub unit: String,
    pub property: String,
    pub interp: String,
    pub advice: String,
    pub default_raw: Option<String>,
    pub none_sentinels: Vec<String>,
}

pub fn explain_field(schema: &ConfigSchema, name: &str) -> Result<FieldExplanation, SchemaError> {
    let f = schema
        .field(name)
        .ok_or_else(|| SchemaError::UnknownField(name.to_string()))?;
    Ok(FieldExplanation {
        name: f.name.clone(),
        subsystem: f.subsystem.clone(),
        tipe: f.tipe,
        unit: f.unit.clone(),
        property: f.property.to_string(),
        interp: f.interp.clone(),
        advice: f.advice.clone(),
        default_raw: f.default_raw.clone(),
        none_sentinels: f.none_sentinels.clone(),
    })
}

impl fmt::Display for FieldExplanation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "field:     {}", self.name)?;
        writeln!(f, "subsystem: {}", self.subsystem)?;
        writeln!(f, "tipe:      {}", self.tipe)?;
        writeln!(f, "unit:      {}", self.unit)?;
        writeln!(f, "property:  {}", self.property)?;
        writeln!(f, "interp:    {}", self.interp)?;
        writeln!(f, "advice:    {}", self.advice)?;
        writeln!(f, "default:   {}", self.default_raw.as_deref().unwrap_or(""))?;
        if !self.none_sentinels.is_empty() {
            writeln!(f, "none:      {}", self.none_sentinels.join(", "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checker::check_field;
    use crate::expr::parse_expr;

    #[test]
    fn bundled_schema_has_named_fields() {
        let s = bundled_hadoop_schema();
        assert_eq!(s.name(), "hadoop");
        assert_eq!(s.field("io.file.buffer.size").unwrap().tipe, RTipe::Pos);
        assert_eq!(
            s.field("mapreduce.jobtracker.maxtasks.perjob").unwrap().none_sentinels,
            ["-1"]
        );
        assert_eq!(s.subsystems(), ["core", "hdfs", "yarn", "mapred"]);
        let uber = s
            .cross_constraints()
            .iter()
            .find(|c| c.id == "uber_map_mem")
            .unwrap();
        match &uber.expr {
            Expr::Binary(expr::BinOp::Implies, guard, _) => {
                assert_eq!(**guard, Expr::field("mapreduce.job.ubertask.enable"))
            }
            other => panic!("unexpected shape {other}"),
        }
        for id in ["uber_map_mem", "uber_reduce_mem", "uber_map_cpu", "uber_reduce_cpu", "maxsplit_gt_minsplit"] {
            assert!(s.cross_constraints().iter().any(|c| c.id == id), "{id}");
        }
        assert!(s.fields().any(|f| f.tipe == RTipe::JavaOpts));
        assert!(s.fields().any(|f| f.property.to_string() == "value in env.comp_codecs"));
        for name in [
            "yarn.nodemanager.container-manager.thread-count",
            "yarn.sharedcache.admin.thread-count",
        ] {
            assert_eq!(
                s.field(name).unwrap().property.to_string(),
                "value <= env.max_threads"
            );
        }
        for t in RTipe::ALL {
            assert!(s.fields().any(|f| f.tipe == t), "no field of tipe {t}");
        }
    }

    #[test]
    fn bundled_defaults_pass_under_reference_env() {
        let s = bundled_hadoop_schema();
        let env = Environment::reference();
        for f in s.fields() {
            let raw = f.default_raw.as_deref().expect("every bundled field has a default");
            assert!(check_field(f, raw, false, &env).is_ok(), "{}", f.name);
        }
    }

    #[test]
    fn explain_known_and_unknown() {
        let s = bundled_hadoop_schema();
        let e = explain_field(&s, "io.file.buffer.size").unwrap();
        assert_eq!(e.tipe, RTipe::Pos);
        assert_eq!(e.property, "value mod env.hw_page_size == 0");
        assert!(e.to_string().contains("property:  value mod env.hw_page_size == 0"));
        assert!(matches!(explain_field(&s, "no.such.field"), Err(SchemaError::UnknownField(_))));
        // The commonly cited `io.buffer.size` is not a real field.
        assert!(matches!(explain_field(&s, "io.buffer.size"), Err(SchemaError::UnknownField(_))));
    }

    fn field(name: &str, tipe: RTipe, property: &str) -> FieldSpec {
        let mut f = FieldSpec::new(name, "core", tipe);
        f.property = parse_expr(property).unwrap();
        f
    }

    #[test]
    fn validation_rejections() {
        let dup = ConfigSchema::new(
            "t",
            [field("a", RTipe::Pos, "true"), field("a", RTipe::Int, "true")],
            vec![],
        );
        assert!(matches!(dup, Err(SchemaError::DuplicateField(_))));

        let optpos = ConfigSchema::new("t", [field("a", RTipe::OptionPos, "true")], vec![]);
        assert!(matches!(optpos, Err(SchemaError::BadField { .. })));

        let mut sentinel_on_pos = field("a", RTipe::Pos, "true");
        sentinel_on_pos.none_sentinels = vec!["-1".into()];
        assert!(ConfigSchema::new("t", [sentinel_on_pos], vec![]).is_err());

        let mut positive_sentinel = field("a", RTipe::OptionPos, "true");
        positive_sentinel.none_sentinels = vec!["3".into()];
        assert!(ConfigSchema::new("t", [positive_sentinel], vec![]).is_err());

        let ill = ConfigSchema::new("t", [field("a", RTipe::Str, "value > 3")], vec![]);
        assert!(matches!(ill, Err(SchemaError::PropertyType { .. })));

        let not_bool = ConfigSchema::new("t", [field("a", RTipe::Pos, "value + 1")], vec![]);
        assert!(matches!(not_bool, Err(SchemaError::BadField { .. })));

        let refs_other = ConfigSchema::new(
            "t",
            [field("a", RTipe::Pos, "value > field(b)"), field("b", RTipe::Pos, "true")],
            vec![],
        );
        assert!(matches!(refs_other, Err(SchemaError::BadField { .. })));

        let mut bad_default = field("a", RTipe::Pos, "value mod env.hw_page_size == 0");
        bad_default.default_raw = Some("4097".into());
        assert!(ConfigSchema::new("t", [bad_default], vec![]).is_err());

        let dangling = ConfigSchema::new(
            "t",
            [field("a", RTipe::Pos, "true")],
            vec![CrossConstraint {
                id: "c".into(),
                expr: parse_expr("field(a) > field(zz)").unwrap(),
                description: String::new(),
            }],
        );
        assert!(matches!(
            dangling,
            Err(SchemaError::CrossType { source: TypeError::UnknownField(_), .. })
        ));

        let uses_value = ConfigSchema::new(
            "t",
            [field("a", RTipe::Pos, "true")],
            vec![CrossConstraint {
                id: "c".into(),
                expr: parse_expr("value > 1").unwrap(),
                description: String::new(),
            }],
        );
        assert!(matches!(
            uses_value,
            Err(SchemaError::CrossType { source: TypeError::ValueNotAllowed, .. })
        ));
    }
}
