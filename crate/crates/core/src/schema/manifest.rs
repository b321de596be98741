//! Line-oriented schema manifests.
//!
//! ```text
//! [schema]
//! name = hadoop
//!
//! [fields]
//! # name|subsystem|tipe|property|unit|interp|advice|default|variants|sentinels|required
//! io.file.buffer.size|core|pos|value mod env.hw_page_size == 0|bytes|...|...|4096|4096,8192||false
//!
//! [cross]
//! # id|expr|description
//! maxsplit_gt_minsplit|field(a) > field(b)|...
//! ```
//!
//! A backslash escapes the next character, so `\|`, `\,` and `\\` can appear
//! inside cells. Variants and sentinels are comma-separated lists.

use super::{ConfigSchema, CrossConstraint, FieldSpec, SchemaError};
use crate::expr::parse_expr;

const FIELD_COLUMNS: usize = 11;
const CROSS_COLUMNS: usize = 3;

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Schema,
    Fields,
    Cross,
}

/// Splits on unescaped `sep`, leaving escape sequences in place.
fn split_escaped(s: &str, sep: char) -> Vec<String> {
    let mut out = vec![String::new()];
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            let cur = out.last_mut().unwrap();
            cur.push(c);
            if let Some(n) = chars.next() {
                cur.push(n);
            }
        } else if c == sep {
            out.push(String::new());
        } else {
            out.last_mut().unwrap().push(c);
        }
    }
    out
}

fn unescape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            if let Some(n) = chars.next() {
                out.push(n);
            }
        } else {
            out.push(c);
        }
    }
    out
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        if matches!(c, '\\' | '|' | ',') {
            out.push('\\');
        }
        out.push(c);
    }
    out
}

fn list_cell(cell: &str) -> Vec<String> {
    if cell.trim().is_empty() {
        return Vec::new();
    }
    split_escaped(cell, ',')
        .iter()
        .map(|item| unescape(item.trim()))
        .collect()
}

fn syntax(line: usize, message: impl Into<String>) -> SchemaError {
    SchemaError::Syntax {
        line,
        message: message.into(),
    }
}

/// Parses manifest text. `fallback_name` names the schema when the manifest
/// has no `[schema]` section.
pub fn parse_manifest(text: &str, fallback_name: &str) -> Result<ConfigSchema, SchemaError> {
    let mut section = Section::None;
    let mut name = None;
    let mut fields = Vec::new();
    let mut cross = Vec::new();

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line.starts_with('[') && line.ends_with(']') {
            section = match &line[1..line.len() - 1] {
                "schema" => Section::Schema,
                "fields" => Section::Fields,
                "cross" => Section::Cross,
                other => return Err(syntax(line_no, format!("unknown section [{other}]"))),
            };
            continue;
        }
        match section {
            Section::None => return Err(syntax(line_no, "content before any section header")),
            Section::Schema => {
                let (k, v) = line
                    .split_once('=')
                    .ok_or_else(|| syntax(line_no, "expected `key = value`"))?;
                match k.trim() {
                    "name" => name = Some(v.trim().to_string()),
                    other => return Err(syntax(line_no, format!("unknown schema key `{other}`"))),
                }
            }
            Section::Fields => fields.push(parse_field_row(line, line_no)?),
            Section::Cross => {
                let cells = split_escaped(line, '|');
                if cells.len() != CROSS_COLUMNS {
                    return Err(syntax(
                        line_no,
                        format!("expected {CROSS_COLUMNS} columns, found {}", cells.len()),
                    ));
                }
                let id = unescape(cells[0].trim());
                if id.is_empty() {
                    return Err(syntax(line_no, "empty constraint id"));
                }
                cross.push(CrossConstraint {
                    id,
                    expr: parse_cell_expr(&unescape(cells[1].trim()), line_no)?,
                    description: unescape(cells[2].trim()),
                });
            }
        }
    }

    let name = name.unwrap_or_else(|| fallback_name.to_string());
    ConfigSchema::new(name, fields, cross)
}

fn parse_cell_expr(text: &str, line: usize) -> Result<crate::expr::Expr, SchemaError> {
    parse_expr(text).map_err(|source| SchemaError::Expr {
        line,
        text: text.to_string(),
        source,
    })
}

fn parse_field_row(line: &str, line_no: usize) -> Result<FieldSpec, SchemaError> {
    let cells = split_escaped(line, '|');
    if cells.len() != FIELD_COLUMNS {
        return Err(syntax(
            line_no,
            format!("expected {FIELD_COLUMNS} columns, found {}", cells.len()),
        ));
    }
    let scalar = |i: usize| unescape(cells[i].trim());
    let name = scalar(0);
    let tipe = scalar(2)
        .parse()
        .map_err(|e| syntax(line_no, format!("{e}")))?;
    let property_text = scalar(3);
    let property = if property_text.is_empty() {
        parse_cell_expr("true", line_no)?
    } else {
        parse_cell_expr(&property_text, line_no)?
    };
    let default = scalar(7);
    let variants = list_cell(&cells[8]);
    let required = match scalar(10).as_str() {
        "" | "false" => false,
        "true" => true,
        other => return Err(syntax(line_no, format!("required must be true or false, not `{other}`"))),
    };
    Ok(FieldSpec {
        name,
        subsystem: scalar(1),
        tipe,
        property,
        unit: scalar(4),
        interp: scalar(5),
        advice: scalar(6),
        default_raw: (!default.is_empty()).then_some(default),
        grid_variants: (!variants.is_empty()).then_some(variants),
        none_sentinels: list_cell(&cells[9]),
        required,
    })
}

/// Renders a schema as manifest text, fields in name order.
pub fn render_manifest(schema: &ConfigSchema) -> String {
    let mut out = String::new();
    out.push_str("[schema]\n");
    out.push_str(&format!("name = {}\n\n[fields]\n", schema.name()));
    for f in schema.fields() {
        let list = |items: &[String]| items.iter().map(|s| escape(s)).collect::<Vec<_>>().join(",");
        let cells = [
            escape(&f.name),
            escape(&f.subsystem),
            f.tipe.tag().to_string(),
            escape(&f.property.to_string()),
            escape(&f.unit),
            escape(&f.interp),
            escape(&f.advice),
            escape(f.default_raw.as_deref().unwrap_or("")),
            list(f.grid_variants.as_deref().unwrap_or(&[])),
            list(&f.none_sentinels),
            f.required.to_string(),
        ];
        out.push_str(&cells.join("|"));
        out.push('\n');
    }
    if !schema.cross_constraints().is_empty() {
        out.push_str("\n[cross]\n");
        for c in schema.cross_constraints() {
            out.push_str(&format!(
                "{}|{}|{}\n",
                escape(&c.id),
                escape(&c.expr.to_string()),
                escape(&c.description)
            ));
        }
    }
    out
}
