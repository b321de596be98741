//! Real-world type checking for system configurations.
//!
//! Raw configuration values are lifted to constrained base-type values,
//! checked against per-field properties and cross-field constraints under a
//! platform [`Environment`], and the checker is used to filter invalid
//! candidates out of a performance-tuning search loop.

pub mod checker;
pub mod env;
pub mod expr;
pub mod ingest;
pub mod model;
pub mod schema;
pub mod search;

pub use checker::{check_config, check_field, lift_value, CertifiedConfig, CheckReport, Outcome};
pub use env::Environment;
pub use schema::{bundled_hadoop_schema, load_schema, ConfigSchema, FieldSpec};
