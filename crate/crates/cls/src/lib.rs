//! File formats, experiment sweeps and the command line around `cls-core`.

pub mod cli;
pub mod csv_io;
mod error;
pub mod harness;

pub use error::{Error, Result};
