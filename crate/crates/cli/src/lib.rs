//! Batch front end for the mellinfrac library.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod config;
pub mod error;
pub mod run;

pub use config::RunConfig;
pub use error::CliError;
