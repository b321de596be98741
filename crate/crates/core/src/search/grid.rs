use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SearchError;
use crate::model::{parse_decimal_int, RTipe, RawConfig};
use crate::schema::{ConfigSchema, FieldSpec};

/// Multipliers, in tenths, applied to a numeric default to derive candidates.
const SCALE_TENTHS: [i64; 5] = [8, 9, 10, 11, 12];
/// Positive limits tried for option-positive fields besides their sentinels.
const SMALL_POSITIVES: [&str; 4] = ["1", "2", "3", "4"];

/// Per-field candidate lists plus the sampling seed and sample count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    fields: Vec<(String, Vec<String>)>,
    seed: u64,
    sample_count: usize,
}

impl Grid {
    pub fn new(
        fields: Vec<(String, Vec<String>)>,
        seed: u64,
        sample_count: usize,
    ) -> Result<Self, SearchError> {
        if sample_count == 0 {
            return Err(SearchError::ZeroSamples);
        }
        if let Some((name, _)) = fields.iter().find(|(_, c)| c.is_empty()) {
            return Err(SearchError::EmptyCandidates(name.clone()));
        }
        Ok(Grid {
            fields,
            seed,
            sample_count,
        })
    }

    pub fn fields(&self) -> &[(String, Vec<String>)] {
        &self.fields
    }

    pub fn candidates(&self, field: &str) -> Option<&[String]> {
        self.fields
            .iter()
            .find(|(n, _)| n == field)
            .map(|(_, c)| c.as_slice())
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn sample_count(&self) -> usize {
        self.sample_count
    }

    /// Number of distinct configurations the grid spans, saturating.
    pub fn combinations(&self) -> u128 {
        self.fields
            .iter()
            .fold(1u128, |acc, (_, c)| acc.saturating_mul(c.len() as u128))
    }
}

/// Builds a grid over every schema field, in schema order.
///
/// Candidates come from `overrides`, else the field's grid variants, else
/// are derived from its type and default.
pub fn build_grid(
    schema: &ConfigSchema,
    overrides: &BTreeMap<String, Vec<String>>,
    seed: u64,
    sample_count: usize,
) -> Result<Grid, SearchError> {
    if let Some(name) = overrides.keys().find(|k| schema.field(k).is_none()) {
        return Err(SearchError::UnknownField(name.clone()));
    }
    let mut fields = Vec::with_capacity(schema.len());
    for spec in schema.fields() {
        let candidates = match (overrides.get(&spec.name), &spec.grid_variants) {
            (Some(o), _) => o.clone(),
            (None, Some(v)) => v.clone(),
            (None, None) => derive_candidates(spec)?,
        };
        fields.push((spec.name.clone(), candidates));
    }
    Grid::new(fields, seed, sample_count)
}

/// The derivation rule for a field without explicit variants.
pub fn derive_candidates(spec: &FieldSpec) -> Result<Vec<String>, SearchError> {
    let no_default = || SearchError::NoCandidates(spec.name.clone());
    match spec.tipe {
        RTipe::Bool => Ok(vec!["true".into(), "false".into()]),
        RTipe::OptionPos => {
            let mut out = spec.none_sentinels.clone();
            out.extend(SMALL_POSITIVES.iter().map(|s| s.to_string()));
            Ok(out)
        }
        RTipe::Str | RTipe::JavaOpts => spec.default_raw.clone().map(|d| vec![d]).ok_or_else(no_default),
        RTipe::Int | RTipe::Pos | RTipe::NonNeg => {
            let d = spec
                .default_raw
                .as_deref()
                .and_then(parse_decimal_int)
                .ok_or_else(no_default)?;
            let mut out: Vec<BigInt> = SCALE_TENTHS
                .iter()
                .map(|&k| round_half_away(&d * k, &BigInt::from(10)))
                .collect();
            out.sort();
            out.dedup();
            Ok(out.iter().map(|n| n.to_string()).collect())
        }
        RTipe::Float => {
            let d = spec.default_raw.as_deref().ok_or_else(no_default)?;
            let (mantissa, places) = decimal_parts(d).ok_or_else(no_default)?;
            let mut out: Vec<BigInt> = SCALE_TENTHS.iter().map(|&k| &mantissa * k).collect();
            out.sort();
            out.dedup();
            Ok(out.iter().map(|m| render_scaled(m, places + 1)).collect())
        }
    }
}

fn round_half_away(n: BigInt, d: &BigInt) -> BigInt {
    let (q, r) = n.div_rem(d);
    if r.abs() * 2 >= *d {
        q + n.signum()
    } else {
        q
    }
}

/// Splits a decimal like `-0.80` into mantissa -80 and 2 places.
fn decimal_parts(text: &str) -> Option<(BigInt, usize)> {
    let (int_part, frac) = text.split_once('.').unwrap_or((text, ""));
    let mantissa = parse_decimal_int(&format!("{int_part}{frac}"))?;
    Some((mantissa, frac.len()))
}

/// Renders `m / 10^places` without trailing zeros, keeping one fractional
/// digit.
fn render_scaled(m: &BigInt, places: usize) -> String {
    let digits = m.abs().to_string();
    let padded = format!("{digits:0>width$}", width = places + 1);
    let (int_part, frac) = padded.split_at(padded.len() - places);
    let frac = frac.trim_end_matches('0');
    let frac = if frac.is_empty() { "0" } else { frac };
    let sign = if m.is_negative() { "-" } else { "" };
    format!("{sign}{int_part}.{frac}")
}

/// The seeded stream of sampled configurations, one per grid draw.
pub struct Candidates<'a> {
    grid: &'a Grid,
    rng: ChaCha8Rng,
    remaining: usize,
}

impl Iterator for Candidates<'_> {
    type Item = RawConfig;

    fn next(&mut self) -> Option<RawConfig> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let mut c = RawConfig::new();
        for (name, candidates) in &self.grid.fields {
            let i = self.rng.random_range(0..candidates.len());
            c.set(name.clone(), candidates[i].clone());
        }
        Some(c)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (self.remaining, Some(self.remaining))
    }
}

impl ExactSizeIterator for Candidates<'_> {}

/// Draws `sample_count` configurations, each field chosen uniformly and
/// independently. The same grid always yields the same stream.
pub fn sample_candidates(grid: &Grid) -> Candidates<'_> {
    Candidates {
        grid,
        rng: ChaCha8Rng::seed_from_u64(grid.seed),
        remaining: grid.sample_count,
    }
}
