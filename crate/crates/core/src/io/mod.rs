//! Generators, file ingestion, run configuration and report documents.

mod config;
mod generate;
mod ingest;
mod report;

pub use config::{default_corpus, RunConfig, OUT_DIR_ENV};
pub use generate::{GeneratorKind, GeneratorSpec, SetKind};
pub use ingest::{load_sequence, write_sequence_csv, Format};
pub use report::{profile_rows, Meta, ProfileRows, Report, ResultRow};
