//! Time-series econometrics engine for annual macro data.
//!
//! The pipeline runs from ingestion to inference:
//!
//! * [`dataset`]: annual series, CSV ingestion, log/lag/difference transforms
//! * [`regress`]: OLS on a pivoted QR factorisation, Wald F tests
//! * [`unitroot`]: Phillips-Perron test with Newey-West long-run variance
//! * [`ardl`]: lag selection, error-correction fit, long-run coefficients,
//!   bounds cointegration test
//! * [`dynsim`]: stochastic counterfactual simulation of a fitted
//!   error-correction model
//! * [`diagnostics`]: Breusch-Godfrey, information-matrix decomposition,
//!   CUSUM, Jarque-Bera
//! * [`krls`]: Gaussian-kernel regularised least squares with pointwise
//!   marginal effects
//!
//! Data-parallel loops honour [`exec::Execution`]; build without the default
//! `parallel` feature for a purely sequential engine.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod ardl;
pub mod dataset;
pub mod diagnostics;
pub mod dynsim;
pub mod error;
pub mod exec;
pub mod krls;
pub mod montecarlo;
pub mod regress;
pub mod stats;
pub mod synthetic;
pub mod tables;
pub mod unitroot;

pub use error::{Error, ErrorCategory, Result};
pub use exec::Execution;
