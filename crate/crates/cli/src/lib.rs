//! Config-driven runner behind the `mwsim` binary.
//!
//! `run` expands a scenario config into jobs, executes them on a worker pool
//! and writes one CSV per job plus a JSON manifest; `plot` renders SVG figures
//! from a manifest; `validate` checks a config without computing anything.

// Range checks are written `!(a < b)` so that NaN fails them too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod holo;
pub mod plot;
pub mod runner;

pub use error::{CliError, CliResult};
