//! Hadoop `*-site.xml` files: parsing, layered merging with `final`
//! semantics, and serialization.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::model::{Diagnostic, DiagnosticKind, RawConfig, RawEntry, Source};

pub const FINAL_ID: &str = "final";

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed XML: {source}")]
    Xml {
        path: PathBuf,
        #[source]
        source: roxmltree::Error,
    },
    #[error("{path}: root element is <{found}>, expected <configuration>")]
    NotConfiguration { path: PathBuf, found: String },
    #[error("{path}: property #{ordinal} has no <{child}> element")]
    MissingChild {
        path: PathBuf,
        ordinal: usize,
        child: &'static str,
    },
    #[error("{path}: property `{name}` appears more than once")]
    DuplicateName { path: PathBuf, name: String },
    #[error("{path}: property `{name}` has <final>{value}</final>; expected true or false")]
    BadFinal {
        path: PathBuf,
        name: String,
        value: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SiteEntry {
    pub name: String,
    pub value: String,
    pub is_final: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SiteFile {
    pub path: PathBuf,
    /// In document order; names are unique.
    pub entries: Vec<SiteEntry>,
}

impl SiteFile {
    /// A file holding the entries of `config` in name order.
    pub fn from_config(path: impl Into<PathBuf>, config: &RawConfig) -> Self {
        SiteFile {
            path: path.into(),
            entries: config
                .entries
                .iter()
                .map(|(name, e)| SiteEntry {
                    name: name.clone(),
                    value: e.raw_value.clone(),
                    is_final: e.is_final,
                })
                .collect(),
        }
    }
}

pub fn parse_site_file(path: &Path) -> Result<SiteFile, IngestError> {
    let text = std::fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_site_str(&text, path)
}

fn element_text(node: roxmltree::Node<'_, '_>) -> String {
    node.descendants()
        .filter(|n| n.is_text())
        .filter_map(|n| n.text())
        .collect::<String>()
        .trim()
        .to_string()
}

/// Parses site-file text; `path` is only used for provenance and errors.
pub fn parse_site_str(text: &str, path: &Path) -> Result<SiteFile, IngestError> {
    let opts = roxmltree::ParsingOptions {
        allow_dtd: true,
        ..Default::default()
    };
    let doc = roxmltree::Document::parse_with_options(text, opts).map_err(|source| IngestError::Xml {
        path: path.to_path_buf(),
        source,
    })?;
    let root = doc.root_element();
    if root.tag_name().name() != "configuration" {
        return Err(IngestError::NotConfiguration {
            path: path.to_path_buf(),
            found: root.tag_name().name().to_string(),
        });
    }

    let mut entries: Vec<SiteEntry> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (ordinal, prop) in root
        .children()
        .filter(|n| n.is_element() && n.tag_name().name() == "property")
        .enumerate()
    {
        let child = |tag: &str| {
            prop.children()
                .find(|n| n.is_element() && n.tag_name().name() == tag)
        };
        let missing = |child: &'static str| IngestError::MissingChild {
            path: path.to_path_buf(),
            ordinal,
            child,
        };
        let name = element_text(child("name").ok_or_else(|| missing("name"))?);
        let value = element_text(child("value").ok_or_else(|| missing("value"))?);
        let is_final = match child("final").map(element_text) {
            None => false,
            Some(f) if f == "true" => true,
            Some(f) if f == "false" => false,
            Some(f) => {
                return Err(IngestError::BadFinal {
                    path: path.to_path_buf(),
                    name,
                    value: f,
                })
            }
        };
        if !seen.insert(name.clone()) {
            return Err(IngestError::DuplicateName {
                path: path.to_path_buf(),
                name,
            });
        }
        entries.push(SiteEntry {
            name,
            value,
            is_final,
        });
    }
    Ok(SiteFile {
        path: path.to_path_buf(),
        entries,
    })
}

/// Layers files left to right. A later file overrides an earlier value
/// unless the earlier occurrence was final, in which case the earlier value
/// stays and a `FinalOverride` warning is produced.
pub fn merge_configs(files: &[SiteFile]) -> (RawConfig, Vec<Diagnostic>) {
    let mut merged = RawConfig::new();
    let mut diagnostics = Vec::new();
    for file in files {
        for (ordinal, e) in file.entries.iter().enumerate() {
            if let Some(kept) = merged.entries.get(&e.name) {
                if kept.is_final {
                    let from = kept
                        .source
                        .as_ref()
                        .map(|s| s.path.display().to_string())
                        .unwrap_or_default();
                    diagnostics.push(Diagnostic::for_field(
                        DiagnosticKind::FinalOverride,
                        &e.name,
                        FINAL_ID,
                        format!(
                            "{} sets `{}` but `{}` from {from} is final; keeping it",
                            file.path.display(),
                            e.value,
                            kept.raw_value
                        ),
                    ));
                    continue;
                }
            }
            merged.insert(
                e.name.clone(),
                RawEntry {
                    raw_value: e.value.clone(),
                    is_final: e.is_final,
                    source: Some(Source {
                        path: file.path.clone(),
                        ordinal,
                    }),
                },
            );
        }
    }
    (merged, diagnostics)
}

fn escape_xml(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Renders a site file with entries in name order.
pub fn serialize_config(c: &RawConfig) -> String {
    if c.is_empty() {
        return "<configuration></configuration>\n".to_string();
    }
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<configuration>\n");
    for (name, e) in &c.entries {
        out.push_str("  <property>\n");
        out.push_str(&format!("    <name>{}</name>\n", escape_xml(name)));
        out.push_str(&format!("    <value>{}</value>\n", escape_xml(&e.raw_value)));
        if e.is_final {
            out.push_str("    <final>true</final>\n");
        }
        out.push_str("  </property>\n");
    }
    out.push_str("</configuration>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<SiteFile, IngestError> {
        parse_site_str(text, Path::new("t.xml"))
    }

    fn file(entries: &[(&str, &str, bool)]) -> SiteFile {
        SiteFile {
            path: PathBuf::from("f.xml"),
            entries: entries
                .iter()
                .map(|(n, v, f)| SiteEntry {
                    name: n.to_string(),
                    value: v.to_string(),
                    is_final: *f,
                })
                .collect(),
        }
    }

    #[test]
    fn parses_single_property() {
        let f = parse(
            "<configuration><property><name>io.file.buffer.size</name><value>65536</value></property></configuration>",
        )
        .unwrap();
        assert_eq!(
            f.entries,
            [SiteEntry {
                name: "io.file.buffer.size".into(),
                value: "65536".into(),
                is_final: false
            }]
        );
        assert!(parse("<configuration/>").unwrap().entries.is_empty());
    }

    #[test]
    fn tolerates_real_world_noise() {
        let f = parse(
            r#"<?xml version="1.0"?>
<?xml-stylesheet type="text/xsl" href="configuration.xsl"?>
<!-- site overrides -->
<configuration xmlns:xi="http://www.w3.org/2001/XInclude">
  <property>
    <name> dfs.replication </name>
    <value>
      2
    </value>
    <description>Replicas &amp; more</description>
    <final>true</final>
  </property>
  <property source="x"><name>a</name><value/></property>
</configuration>"#,
        )
        .unwrap();
        assert_eq!(f.entries[0].name, "dfs.replication");
        assert_eq!(f.entries[0].value, "2");
        assert!(f.entries[0].is_final);
        assert_eq!(f.entries[1].value, "");
    }

    #[test]
    fn rejects_bad_documents() {
        let dup = "<configuration><property><name>a</name><value>1</value></property>\
                   <property><name>a</name><value>2</value></property></configuration>";
        assert!(matches!(parse(dup), Err(IngestError::DuplicateName { .. })));
        assert!(matches!(
            parse("<configuration><property><name>a</name></property></configuration>"),
            Err(IngestError::MissingChild { child: "value", .. })
        ));
        assert!(matches!(parse("<conf/>"), Err(IngestError::NotConfiguration { .. })));
        assert!(matches!(parse("<configuration>"), Err(IngestError::Xml { .. })));
        assert!(matches!(
            parse("<configuration><property><name>a</name><value>1</value><final>yes</final></property></configuration>"),
            Err(IngestError::BadFinal { .. })
        ));
    }

    #[test]
    fn final_semantics() {
        let (c, d) = merge_configs(&[file(&[("x", "1", true)]), file(&[("x", "2", false)])]);
        assert_eq!(c.get("x").unwrap().raw_value, "1");
        assert!(c.get("x").unwrap().is_final);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].kind, DiagnosticKind::FinalOverride);

        let (c, d) = merge_configs(&[file(&[("x", "1", false)]), file(&[("x", "2", false)])]);
        assert_eq!(c.get("x").unwrap().raw_value, "2");
        assert!(d.is_empty());

        let (c, _) = merge_configs(&[file(&[("x", "1", false)])]);
        assert_eq!(c.values(), [("x", "1")].into_iter().collect());
    }

    #[test]
    fn serialization_shapes() {
        assert_eq!(serialize_config(&RawConfig::new()), "<configuration></configuration>\n");
        let mut c = RawConfig::new();
        c.insert(
            "b",
            RawEntry {
                raw_value: "<&>".into(),
                is_final: true,
                source: None,
            },
        );
        c.set("a", "65536");
        let text = serialize_config(&c);
        assert!(text.contains("<final>true</final>"));
        assert_eq!(text.matches("<final>").count(), 1);
        assert!(text.find("<name>a</name>").unwrap() < text.find("<name>b</name>").unwrap());
        let back = parse(&text).unwrap();
        assert_eq!(back.entries[1].value, "<&>");
        assert_eq!(merge_configs(&[back]).0.values(), c.values());
    }
}
