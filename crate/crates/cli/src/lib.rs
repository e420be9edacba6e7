//! Experiment drivers behind the `carleman-adr` command-line tool.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

pub use config::Config;
pub use error::CliError;
pub use experiments::Report;
