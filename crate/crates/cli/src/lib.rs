//! Batch pipeline and command-line front end for `dynardl-core`.
//!
//! [`pipeline::run_pipeline`] chains unit-root tests, lag selection, the
//! error-correction fit, the bounds test, counterfactual simulation,
//! diagnostics and KRLS, and writes CSV tables, SVG figures and a JSON
//! results document. The individual stages back the subcommands in
//! [`commands`].

pub mod artifact;
pub mod commands;
pub mod config;
pub mod error;
pub mod fetch;
pub mod pipeline;
pub mod report;
pub mod svg;

pub use dynardl_core as core;
pub use error::{CliError, CliResult};
