//! Filter-then-profile search over sampled configurations.

mod grid;
mod profiler;

use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::checker::{check_config, CheckReport};
use crate::env::Environment;
use crate::model::RawConfig;
use crate::schema::ConfigSchema;

pub use grid::{build_grid, derive_candidates, sample_candidates, Candidates, Grid};
pub use profiler::{MockProfiler, ProfileError, Profiler, NOMINAL_PROFILE_S};

pub const DEFAULT_RUNS: u32 = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("sample count must be at least 1")]
    ZeroSamples,
    #[error("field `{0}` has an empty candidate list")]
    EmptyCandidates(String),
    #[error("field `{0}` has no default and no variants to build candidates from")]
    NoCandidates(String),
    #[error("override names unknown field `{0}`")]
    UnknownField(String),
    #[error("runs per configuration must be at least 1")]
    ZeroRuns,
    #[error("savings undefined: {0}")]
    Savings(String),
}

/// Time saved by not profiling invalid candidates, net of checking cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Savings {
    pub saved_s: f64,
    pub saved_fraction: f64,
}

/// `saved_s = invalid * profile_time_s * runs - check_time_total_s`, and
/// `saved_fraction = saved_s / (total * profile_time_s * runs)`.
pub fn compute_savings(
    total: u64,
    invalid: u64,
    profile_time_s: f64,
    runs: u32,
    check_time_total_s: f64,
) -> Result<Savings, SearchError> {
    let err = |m: &str| Err(SearchError::Savings(m.to_string()));
    if total == 0 {
        return err("total is zero");
    }
    if invalid > total {
        return err("more invalid configurations than total");
    }
    if !(profile_time_s.is_finite() && profile_time_s > 0.0) {
        return err("profile time must be positive");
    }
    if runs == 0 {
        return err("runs must be at least 1");
    }
    if !(check_time_total_s.is_finite() && check_time_total_s >= 0.0) {
        return err("check time must be non-negative");
    }
    let per_config = profile_time_s * f64::from(runs);
    let saved_s = invalid as f64 * per_config - check_time_total_s;
    Ok(Savings {
        saved_s,
        saved_fraction: saved_s / (total as f64 * per_config),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchStats {
    pub total: u64,
    pub invalid: u64,
    pub valid: u64,
    pub runs_per_config: u32,
    /// Mean measured runtime per profiling run; nominal when nothing ran.
    pub profile_time_s: f64,
    pub check_time_total_s: f64,
    pub profiler_calls: u64,
    pub best_index: Option<usize>,
    pub best_config: Option<RawConfig>,
    pub best_runtime_s: Option<f64>,
    pub saved_s: f64,
    pub saved_fraction: f64,
    /// Candidates skipped because the profiler failed, with the reason.
    pub skipped: Vec<(usize, String)>,
}

impl SearchStats {
    /// Replaces the measured checking time with a fixed per-check cost and
    /// recomputes the savings, which makes the stats fully reproducible.
    pub fn charge_check_cost(&mut self, per_check_s: f64) {
        self.check_time_total_s = per_check_s * self.total as f64;
        self.refresh_savings();
    }

    fn refresh_savings(&mut self) {
        let s = compute_savings(
            self.total,
            self.invalid,
            self.profile_time_s,
            self.runs_per_config,
            self.check_time_total_s,
        )
        .expect("stats satisfy the savings preconditions");
        self.saved_s = s.saved_s;
        self.saved_fraction = s.saved_fraction;
    }
}

impl fmt::Display for SearchStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |v: Option<f64>| v.map_or("none".to_string(), |x| format!("{x:.6}"));
        writeln!(f, "total: {}", self.total)?;
        writeln!(f, "invalid: {}", self.invalid)?;
        writeln!(f, "valid: {}", self.valid)?;
        writeln!(f, "runs_per_config: {}", self.runs_per_config)?;
        writeln!(f, "profiler_calls: {}", self.profiler_calls)?;
        writeln!(f, "profile_time_s: {:.6}", self.profile_time_s)?;
        writeln!(f, "check_time_total_s: {:.6}", self.check_time_total_s)?;
        writeln!(
            f,
            "best_index: {}",
            self.best_index.map_or("none".to_string(), |i| i.to_string())
        )?;
        writeln!(f, "best_runtime_s: {}", opt(self.best_runtime_s))?;
        writeln!(f, "saved_s: {:.6}", self.saved_s)?;
        writeln!(f, "saved_fraction: {:.6}", self.saved_fraction)?;
        for (i, why) in &self.skipped {
            writeln!(f, "skipped: {i}: {why}")?;
        }
        Ok(())
    }
}

enum Scored {
    Invalid,
    Profiled { runtimes: Vec<f64> },
    Failed { runs_done: usize, reason: String },
}

/// Checks every sampled candidate, profiles only those that pass, and keeps
/// the one with the lowest mean runtime (earliest in the stream on ties).
///
/// Candidates are processed in parallel; results are combined in stream
/// order so the outcome does not depend on scheduling.
pub fn run_search(
    schema: &ConfigSchema,
    env: &Environment,
    grid: &Grid,
    profiler: &dyn Profiler,
    runs: u32,
) -> Result<SearchStats, SearchError> {
    if runs == 0 {
        return Err(SearchError::ZeroRuns);
    }
    let candidates: Vec<RawConfig> = sample_candidates(grid).collect();
    let scored: Vec<(Scored, f64)> = candidates
        .par_iter()
        .map(|c| {
            let report = check_config(schema, c, env);
            let check_s = report.check_duration.as_secs_f64();
            if !report.passed() {
                return (Scored::Invalid, check_s);
            }
            let mut runtimes = Vec::with_capacity(runs as usize);
            for _ in 0..runs {
                match profiler.measure(c) {
                    Ok(t) => runtimes.push(t),
                    Err(e) => {
                        return (
                            Scored::Failed {
                                runs_done: runtimes.len() + 1,
                                reason: e.to_string(),
                            },
                            check_s,
                        )
                    }
                }
            }
            (Scored::Profiled { runtimes }, check_s)
        })
        .collect();

    let mut stats = SearchStats {
        total: candidates.len() as u64,
        invalid: 0,
        valid: 0,
        runs_per_config: runs,
        profile_time_s: NOMINAL_PROFILE_S,
        check_time_total_s: 0.0,
        profiler_calls: 0,
        best_index: None,
        best_config: None,
        best_runtime_s: None,
        saved_s: 0.0,
        saved_fraction: 0.0,
        skipped: Vec::new(),
    };
    let mut runtime_sum = 0.0;
    let mut runtime_count = 0u64;
    for (i, (s, check_s)) in scored.into_iter().enumerate() {
        stats.check_time_total_s += check_s;
        match s {
            Scored::Invalid => stats.invalid += 1,
            Scored::Failed { runs_done, reason } => {
                stats.valid += 1;
                stats.profiler_calls += runs_done as u64;
                stats.skipped.push((i, reason));
            }
            Scored::Profiled { runtimes } => {
                stats.valid += 1;
                stats.profiler_calls += runtimes.len() as u64;
                runtime_sum += runtimes.iter().sum::<f64>();
                runtime_count += runtimes.len() as u64;
                let mean = runtimes.iter().sum::<f64>() / runtimes.len() as f64;
                if stats.best_runtime_s.is_none_or(|b| mean < b) {
                    stats.best_runtime_s = Some(mean);
                    stats.best_index = Some(i);
                }
            }
        }
    }
    if runtime_count > 0 {
        stats.profile_time_s = runtime_sum / runtime_count as f64;
    }
    stats.best_config = stats.best_index.map(|i| candidates[i].clone());
    stats.refresh_savings();
    Ok(stats)
}

/// Which sampled candidates [`generate`] keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GenerateFilter {
    #[default]
    All,
    ValidOnly,
    InvalidOnly,
}

/// One sampled candidate with its check report.
pub struct Generated {
    pub index: usize,
    pub config: RawConfig,
    pub report: CheckReport,
}

/// Samples the grid and checks every candidate, keeping those the filter
/// selects, in stream order.
pub fn generate(
    schema: &ConfigSchema,
    env: &Environment,
    grid: &Grid,
    filter: GenerateFilter,
) -> Vec<Generated> {
    let candidates: Vec<RawConfig> = sample_candidates(grid).collect();
    candidates
        .into_par_iter()
        .enumerate()
        .map(|(index, config)| {
            let report = check_config(schema, &config, env);
            Generated {
                index,
                config,
                report,
            }
        })
        .filter(|g| match filter {
            GenerateFilter::All => true,
            GenerateFilter::ValidOnly => g.report.passed(),
            GenerateFilter::InvalidOnly => !g.report.passed(),
        })
        .collect()
}
