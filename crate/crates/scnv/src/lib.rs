//! Files, checkpoints, the four-model experiment, and the `scnv` command line
//! around `scnv-core`.

pub mod checkpoint;
pub mod cli;
mod error;
pub mod experiment;
pub mod manifest;
pub mod report;

pub use error::{Error, Result};
