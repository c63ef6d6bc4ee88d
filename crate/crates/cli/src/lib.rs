//! Library side of the `msstgarch` command-line tool: configuration, CSV
//! ingestion, subcommand bodies and output writers.

pub mod commands;
pub mod config;
pub mod error;
pub mod ingest;
pub mod output;
