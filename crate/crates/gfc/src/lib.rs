//! Command line, file formats and parallel Monte Carlo drivers for
//! [`gfc_core`].
//!
//! - [`spec`]: the exponent and process grammar, and their JSON forms.
//! - [`output`]: CSV tables with JSON metadata sidecars.
//! - [`batch`]: rayon execution of reproducible stream plans.
//! - [`repro`]: end-to-end reproduction checks with independent oracles.
//! - [`cli`]: the `gfc` binary.

pub mod batch;
pub mod cli;
pub mod error;
pub mod output;
pub mod repro;
pub mod spec;

pub use error::CliError;
