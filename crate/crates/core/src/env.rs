//! Platform parameters referenced by configuration constraints, and the
//! flat `key=value` descriptor file they are read from.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("cannot read environment file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: expected `key=value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key `{key}`")]
    DuplicateKey { line: usize, key: String },
    #[error("missing key `{0}`")]
    MissingKey(&'static str),
    #[error("`{key}` must be a positive integer, got `{value}`")]
    NotPositive { key: &'static str, value: String },
    #[error("codec list contains an empty entry")]
    EmptyCodec,
    #[error("codec `{0}` listed twice")]
    DuplicateCodec(String),
}

/// External platform characteristics implicated in constraints.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Environment {
    phys_cpu_cores: u64,
    virt_cpu_cores: u64,
    phys_mem_mb: u64,
    virt_mem_mb: u64,
    hw_page_size: u64,
    max_file_desc: u64,
    max_threads: u64,
    comp_codecs: Vec<String>,
}

/// Names of the numeric parameters, in descriptor order.
pub const NUMERIC_KEYS: [&str; 7] = [
    "phys_cpu_cores",
    "virt_cpu_cores",
    "phys_mem_mb",
    "virt_mem_mb",
    "hw_page_size",
    "max_file_desc",
    "max_threads",
];

pub const CODECS_KEY: &str = "comp_codecs";

/// Value of an environment parameter as seen by the constraint language.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvValue<'a> {
    Int(u64),
    StrList(&'a [String]),
}

impl Environment {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        phys_cpu_cores: u64,
        virt_cpu_cores: u64,
        phys_mem_mb: u64,
        virt_mem_mb: u64,
        hw_page_size: u64,
        max_file_desc: u64,
        max_threads: u64,
        comp_codecs: Vec<String>,
    ) -> Result<Self, EnvError> {
        let numeric = [
            phys_cpu_cores,
            virt_cpu_cores,
            phys_mem_mb,
            virt_mem_mb,
            hw_page_size,
            max_file_desc,
            max_threads,
        ];
        for (key, value) in NUMERIC_KEYS.into_iter().zip(numeric) {
            if value == 0 {
                return Err(EnvError::NotPositive {
                    key,
                    value: "0".into(),
                });
            }
        }
        let mut seen = HashSet::new();
        for codec in &comp_codecs {
            if codec.is_empty() {
                return Err(EnvError::EmptyCodec);
            }
            if !seen.insert(codec.as_str()) {
                return Err(EnvError::DuplicateCodec(codec.clone()));
            }
        }
        Ok(Environment {
            phys_cpu_cores,
            virt_cpu_cores,
            phys_mem_mb,
            virt_mem_mb,
            hw_page_size,
            max_file_desc,
            max_threads,
            comp_codecs,
        })
    }

    /// The reference platform: 14 physical / 28 virtual cores, 32 GB,
    /// 4 KB pages, 3000 descriptors, 500 threads and the stock codecs.
    pub fn reference() -> Self {
        let codecs = [
            "org.apache.hadoop.io.compress.DefaultCodec",
            "org.apache.hadoop.io.compress.GzipCodec",
            "org.apache.hadoop.io.compress.BZip2Codec",
            "org.apache.hadoop.io.compress.Lz4Codec",
        ];
        Environment::new(
            14,
            28,
            32768,
            32768,
            4096,
            3000,
            500,
            codecs.iter().map(|c| c.to_string()).collect(),
        )
        .expect("reference environment is valid")
    }

    pub fn phys_cpu_cores(&self) -> u64 {
        self.phys_cpu_cores
    }
    pub fn virt_cpu_cores(&self) -> u64 {
        self.virt_cpu_cores
    }
    pub fn phys_mem_mb(&self) -> u64 {
        self.phys_mem_mb
    }
    pub fn virt_mem_mb(&self) -> u64 {
        self.virt_mem_mb
    }
    pub fn hw_page_size(&self) -> u64 {
        self.hw_page_size
    }
    pub fn max_file_desc(&self) -> u64 {
        self.max_file_desc
    }
    pub fn max_threads(&self) -> u64 {
        self.max_threads
    }
    pub fn comp_codecs(&self) -> &[String] {
        &self.comp_codecs
    }

    pub fn lookup(&self, name: &str) -> Option<EnvValue<'_>> {
        let v = match name {
            "phys_cpu_cores" => self.phys_cpu_cores,
            "virt_cpu_cores" => self.virt_cpu_cores,
            "phys_mem_mb" => self.phys_mem_mb,
            "virt_mem_mb" => self.virt_mem_mb,
            "hw_page_size" => self.hw_page_size,
            "max_file_desc" => self.max_file_desc,
            "max_threads" => self.max_threads,
            CODECS_KEY => return Some(EnvValue::StrList(&self.comp_codecs)),
            _ => return None,
        };
        Some(EnvValue::Int(v))
    }

    /// Parses the descriptor text. Blank lines and `#` comments are skipped;
    /// every key must appear exactly once.
    pub fn parse(text: &str) -> Result<Self, EnvError> {
        let mut values: BTreeMap<&str, String> = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or(EnvError::Syntax { line: line_no })?;
            let key = key.trim();
            let known = NUMERIC_KEYS
                .iter()
                .chain(std::iter::once(&CODECS_KEY))
                .find(|k| **k == key)
                .ok_or_else(|| EnvError::UnknownKey {
                    line: line_no,
                    key: key.to_string(),
                })?;
            if values.insert(known, value.trim().to_string()).is_some() {
                return Err(EnvError::DuplicateKey {
                    line: line_no,
                    key: key.to_string(),
                });
            }
        }

        let mut numeric = [0u64; 7];
        for (slot, key) in numeric.iter_mut().zip(NUMERIC_KEYS) {
            let raw = values.get(key).ok_or(EnvError::MissingKey(key))?;
            *slot = raw
                .parse::<u64>()
                .ok()
                .filter(|n| *n > 0)
                .ok_or_else(|| EnvError::NotPositive {
                    key,
                    value: raw.clone(),
                })?;
        }
        let codecs_raw = values
            .get(CODECS_KEY)
            .ok_or(EnvError::MissingKey(CODECS_KEY))?;
        let codecs = if codecs_raw.is_empty() {
            Vec::new()
        } else {
            codecs_raw.split(',').map(|c| c.trim().to_string()).collect()
        };
        let [a, b, c, d, e, f, g] = numeric;
        Environment::new(a, b, c, d, e, f, g, codecs)
    }

    pub fn load(path: &Path) -> Result<Self, EnvError> {
        let text = fs::read_to_string(path).map_err(|source| EnvError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Canonical descriptor text; `parse(render())` is the identity.
    pub fn render(&self) -> String {
        let numeric = [
            self.phys_cpu_cores,
            self.virt_cpu_cores,
            self.phys_mem_mb,
            self.virt_mem_mb,
            self.hw_page_size,
            self.max_file_desc,
            self.max_threads,
        ];
        let mut out = String::new();
        for (key, value) in NUMERIC_KEYS.into_iter().zip(numeric) {
            out.push_str(&format!("{key}={value}\n"));
        }
        out.push_str(&format!("{CODECS_KEY}={}\n", self.comp_codecs.join(",")));
        out
    }

    /// Short stable hash of the canonical rendering.
    pub fn fingerprint(&self) -> String {
        let digest = Sha256::digest(self.render().as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_matches_documented_values() {
        let env = Environment::reference();
        assert_eq!(
            (
                env.phys_cpu_cores(),
                env.virt_cpu_cores(),
                env.phys_mem_mb(),
                env.virt_mem_mb(),
                env.hw_page_size(),
                env.max_file_desc(),
                env.max_threads()
            ),
            (14, 28, 32768, 32768, 4096, 3000, 500)
        );
        assert_eq!(
            env.comp_codecs()[0],
            "org.apache.hadoop.io.compress.DefaultCodec"
        );
    }

    #[test]
    fn render_parse_round_trip() {
        let env = Environment::reference();
        assert_eq!(Environment::parse(&env.render()).unwrap(), env);
        assert_eq!(env.fingerprint().len(), 16);
    }

    #[test]
    fn parse_rejections() {
        let good = Environment::reference().render();
        assert!(matches!(
            Environment::parse(&format!("{good}gpu_count=1\n")),
            Err(EnvError::UnknownKey { line: 9, .. })
        ));
        assert!(matches!(
            Environment::parse(&format!("{good}max_threads=2\n")),
            Err(EnvError::DuplicateKey { .. })
        ));
        let no_threads: String = good
            .lines()
            .filter(|l| !l.starts_with("max_threads"))
            .map(|l| format!("{l}\n"))
            .collect();
        assert!(matches!(
            Environment::parse(&no_threads),
            Err(EnvError::MissingKey("max_threads"))
        ));
        let zero = good.replace("hw_page_size=4096", "hw_page_size=0");
        assert!(matches!(
            Environment::parse(&zero),
            Err(EnvError::NotPositive { key: "hw_page_size", .. })
        ));
        let dup = good.replace("GzipCodec,", "GzipCodec,org.apache.hadoop.io.compress.GzipCodec,");
        assert!(matches!(Environment::parse(&dup), Err(EnvError::DuplicateCodec(_))));
        let empty = good.replace("GzipCodec,", "GzipCodec,,");
        assert!(matches!(Environment::parse(&empty), Err(EnvError::EmptyCodec)));
        assert!(matches!(
            Environment::parse("just words"),
            Err(EnvError::Syntax { line: 1 })
        ));
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = format!("# platform\n\n{}", Environment::reference().render());
        assert_eq!(Environment::parse(&text).unwrap(), Environment::reference());
    }
}
