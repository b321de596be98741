use num_bigint::BigInt;

use super::parser::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub(super) enum Tok {
    Int(BigInt),
    /// Float literal text, unsigned.
    Float(String),
    Str(String),
    Ident(String),
    Env(String),
    Field(String),
    Sym(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub(super) struct Spanned {
    pub tok: Tok,
    pub pos: usize,
}

const SYMBOLS: [&str; 13] = [
    "<=", ">=", "==", "!=", "<", ">", "+", "-", "*", "/", "(", ")", ",",
];

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Characters allowed in a field name inside `field(...)`.
pub fn is_field_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-')
}

pub(super) fn tokenize(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let bytes = src.as_bytes();
    let mut i = 0;
    while i < src.len() {
        let c = src[i..].chars().next().unwrap();
        if c.is_whitespace() {
            i += c.len_utf8();
            continue;
        }
        let start = i;
        if c.is_ascii_digit() {
            while i < src.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i + 1 < src.len() && bytes[i] == b'.' && bytes[i + 1].is_ascii_digit() {
                i += 1;
                while i < src.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                out.push(Spanned {
                    tok: Tok::Float(src[start..i].to_string()),
                    pos: start,
                });
            } else {
                let n = BigInt::parse_bytes(&bytes[start..i], 10).expect("digits");
                out.push(Spanned {
                    tok: Tok::Int(n),
                    pos: start,
                });
            }
            continue;
        }
        if c == '"' {
            i += 1;
            let mut s = String::new();
            loop {
                let Some(ch) = src[i..].chars().next() else {
                    return Err(ParseError::new(start, "unterminated string literal"));
                };
                i += ch.len_utf8();
                match ch {
                    '"' => break,
                    '\\' => {
                        let Some(esc) = src[i..].chars().next() else {
                            return Err(ParseError::new(start, "unterminated string literal"));
                        };
                        i += esc.len_utf8();
                        match esc {
                            '"' | '\\' => s.push(esc),
                            'n' => s.push('\n'),
                            't' => s.push('\t'),
                            _ => {
                                return Err(ParseError::new(
                                    i - esc.len_utf8() - 1,
                                    format!("unknown escape `\\{esc}`"),
                                ))
                            }
                        }
                    }
                    _ => s.push(ch),
                }
            }
            out.push(Spanned {
                tok: Tok::Str(s),
                pos: start,
            });
            continue;
        }
        if is_ident_start(c) {
            while i < src.len() && is_ident_char(bytes[i] as char) {
                i += 1;
            }
            let word = &src[start..i];
            if word == "env" && bytes.get(i) == Some(&b'.') {
                let name_start = i + 1;
                let mut j = name_start;
                if j < src.len() && is_ident_start(bytes[j] as char) {
                    while j < src.len() && is_ident_char(bytes[j] as char) {
                        j += 1;
                    }
                    out.push(Spanned {
                        tok: Tok::Env(src[name_start..j].to_string()),
                        pos: start,
                    });
                    i = j;
                    continue;
                }
                return Err(ParseError::new(name_start, "expected parameter name after `env.`"));
            }
            if word == "field" {
                let mut j = i;
                while j < src.len() && (bytes[j] as char).is_whitespace() {
                    j += 1;
                }
                if bytes.get(j) == Some(&b'(') {
                    j += 1;
                    while j < src.len() && (bytes[j] as char).is_whitespace() {
                        j += 1;
                    }
                    let name_start = j;
                    while j < src.len() && is_field_name_char(bytes[j] as char) {
                        j += 1;
                    }
                    let name = &src[name_start..j];
                    while j < src.len() && (bytes[j] as char).is_whitespace() {
                        j += 1;
                    }
                    if name.is_empty() || bytes.get(j) != Some(&b')') {
                        return Err(ParseError::new(name_start, "expected `field(<dotted.name>)`"));
                    }
                    out.push(Spanned {
                        tok: Tok::Field(name.to_string()),
                        pos: start,
                    });
                    i = j + 1;
                    continue;
                }
            }
            out.push(Spanned {
                tok: Tok::Ident(word.to_string()),
                pos: start,
            });
            continue;
        }
        match SYMBOLS.iter().find(|s| src[i..].starts_with(**s)) {
            Some(sym) => {
                i += sym.len();
                out.push(Spanned {
                    tok: Tok::Sym(sym),
                    pos: start,
                });
            }
            None => return Err(ParseError::new(start, format!("unexpected character `{c}`"))),
        }
    }
    Ok(out)
}
