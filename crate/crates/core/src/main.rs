use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use rwtc::checker::{check_config, render_machine, render_text};
use rwtc::env::Environment;
use rwtc::ingest::{merge_configs, parse_site_file, serialize_config};
use rwtc::schema::{bundled_hadoop_schema, explain_field, load_schema, ConfigSchema};
use rwtc::search::{
    build_grid, compute_savings, generate, run_search, GenerateFilter, MockProfiler,
    DEFAULT_RUNS,
};

/// Real-world type checking for Hadoop-style configurations.
#[derive(Parser)]
#[command(name = "rwtc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SchemaArg {
    /// Schema manifest path, or `bundled` for the built-in Hadoop schema.
    #[arg(long, env = "RWTC_SCHEMA", default_value = "bundled")]
    schema: String,
}

#[derive(Args)]
struct EnvArg {
    /// Environment file path, or `reference` for the built-in platform.
    #[arg(long, default_value = "reference")]
    env: String,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    count: usize,
    /// Replace a field's candidates: `--set name=v1,v2`. Repeatable.
    #[arg(long = "set", value_name = "FIELD=VALUES")]
    overrides: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Machine,
}

#[derive(Subcommand)]
enum Command {
    /// Merge site files left to right and type-check the result.
    Check {
        #[command(flatten)]
        schema: SchemaArg,
        #[command(flatten)]
        env: EnvArg,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Describe one field of the schema.
    Explain {
        #[command(flatten)]
        schema: SchemaArg,
        field: String,
    },
    /// Write sampled candidate configurations as site files.
    Generate {
        #[command(flatten)]
        schema: SchemaArg,
        #[command(flatten)]
        env: EnvArg,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        out: PathBuf,
        /// Keep only candidates that pass.
        #[arg(long, conflicts_with = "invalid_only")]
        valid_only: bool,
        /// Keep only candidates that fail.
        #[arg(long)]
        invalid_only: bool,
    },
    /// Sample, filter through the checker, profile survivors, report the best.
    Search {
        #[command(flatten)]
        schema: SchemaArg,
        #[command(flatten)]
        env: EnvArg,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = DEFAULT_RUNS)]
        runs: u32,
        /// Profiler to use; only `mock:<seed>` is available.
        #[arg(long, default_value = "mock:0")]
        profiler: String,
        /// Write the best configuration here as a site file.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Charge this many seconds per check instead of measured time,
        /// making the report reproducible.
        #[arg(long)]
        check_cost: Option<f64>,
    },
    /// Time saved by filtering, from raw counts.
    Stats {
        #[arg(long)]
        total: u64,
        #[arg(long)]
        invalid: u64,
        #[arg(long)]
        profile_time: f64,
        #[arg(long, default_value_t = DEFAULT_RUNS)]
        runs: u32,
        #[arg(long)]
        check_total: f64,
    },
    /// Print the schema as a manifest.
    Schema {
        #[command(flatten)]
        schema: SchemaArg,
    },
}

/// A failure that maps to exit status 2.
struct UsageError(String);

impl<E: std::fmt::Display> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.to_string())
    }
}

fn load_schema_arg(arg: &SchemaArg) -> Result<ConfigSchema, UsageError> {
    if arg.schema == "bundled" {
        Ok(bundled_hadoop_schema())
    } else {
        Ok(load_schema(Path::new(&arg.schema))?)
    }
}

fn load_env_arg(arg: &EnvArg) -> Result<Environment, UsageError> {
    if arg.env == "reference" {
        Ok(Environment::reference())
    } else {
        Ok(Environment::load(Path::new(&arg.env))?)
    }
}

fn parse_overrides(items: &[String]) -> Result<BTreeMap<String, Vec<String>>, UsageError> {
    let mut out = BTreeMap::new();
    for item in items {
        let (name, values) = item
            .split_once('=')
            .ok_or_else(|| UsageError(format!("--set expects FIELD=VALUES, got `{item}`")))?;
        let values: Vec<String> = if values.is_empty() {
            Vec::new()
        } else {
            values.split(',').map(str::to_string).collect()
        };
        out.insert(name.to_string(), values);
    }
    Ok(out)
}

fn run(cli: Cli) -> Result<ExitCode, UsageError> {
    match cli.command {
        Command::Check {
            schema,
            env,
            format,
            files,
        } => {
            let schema = load_schema_arg(&schema)?;
            let env = load_env_arg(&env)?;
            let sites = files
                .iter()
                .map(|p| parse_site_file(p))
                .collect::<Result<Vec<_>, _>>()?;
            let (raw, merge_diags) = merge_configs(&sites);
            let mut report = check_config(&schema, &raw, &env);
            report.prepend_diagnostics(merge_diags);
            match format {
                Format::Text => print!("{}", render_text(&report)),
                Format::Machine => print!("{}", render_machine(&report)),
            }
            Ok(if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Explain { schema, field } => {
            let schema = load_schema_arg(&schema)?;
            print!("{}", explain_field(&schema, &field)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Generate {
            schema,
            env,
            grid,
            out,
            valid_only,
            invalid_only,
        } => {
            let schema = load_schema_arg(&schema)?;
            let env = load_env_arg(&env)?;
            let g = build_grid(&schema, &parse_overrides(&grid.overrides)?, grid.seed, grid.count)?;
            let filter = match (valid_only, invalid_only) {
                (true, _) => GenerateFilter::ValidOnly,
                (_, true) => GenerateFilter::InvalidOnly,
                _ => GenerateFilter::All,
            };
            std::fs::create_dir_all(&out)
                .map_err(|e| UsageError(format!("cannot create {}: {e}", out.display())))?;
            for item in generate(&schema, &env, &g, filter) {
                let name = format!("candidate-{:05}.xml", item.index);
                let path = out.join(&name);
                std::fs::write(&path, serialize_config(&item.config))
                    .map_err(|e| UsageError(format!("cannot write {}: {e}", path.display())))?;
                let verdict = if item.report.passed() { "PASS" } else { "FAIL" };
                println!("{name}\t{verdict}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Search {
            schema,
            env,
            grid,
            runs,
            profiler,
            out,
            check_cost,
        } => {
            let schema = load_schema_arg(&schema)?;
            let env = load_env_arg(&env)?;
            let seed = profiler
                .strip_prefix("mock:")
                .and_then(|s| s.parse::<u64>().ok())
                .ok_or_else(|| UsageError(format!("unknown profiler `{profiler}`; use mock:<seed>")))?;
            let g = build_grid(&schema, &parse_overrides(&grid.overrides)?, grid.seed, grid.count)?;
            let mut stats = run_search(&schema, &env, &g, &MockProfiler::new(seed), runs)?;
            if let Some(cost) = check_cost {
                if !(cost.is_finite() && cost >= 0.0) {
                    return Err(UsageError("--check-cost must be a non-negative number".into()));
                }
                stats.charge_check_cost(cost);
            }
            print!("{stats}");
            match (&stats.best_config, out) {
                (Some(best), Some(path)) => {
                    std::fs::write(&path, serialize_config(best))
                        .map_err(|e| UsageError(format!("cannot write {}: {e}", path.display())))?;
                    println!("best_config: {}", path.display());
                }
                (Some(best), None) => print!("best_config:\n{}", serialize_config(best)),
                (None, _) => println!("best_config: none"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Stats {
            total,
            invalid,
            profile_time,
            runs,
            check_total,
        } => {
            let s = compute_savings(total, invalid, profile_time, runs, check_total)?;
            println!("saved_s: {}", s.saved_s);
            println!("saved_fraction: {}", s.saved_fraction);
            Ok(ExitCode::SUCCESS)
        }
        Command::Schema { schema } => {
            print!("{}", load_schema_arg(&schema)?.to_manifest());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
