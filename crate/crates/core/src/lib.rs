//! Small-data binary image classification, built from scratch.
//!
//! Everything here is pure computation over in-memory values: dense `f64`
//! tensors, a CNN with hand-written backward passes, the Adam and RMSProp
//! update rules, binary cross-entropy and confusion-matrix metrics, image
//! preprocessing and augmentation, a synthetic two-class dataset, and the
//! seeded training loop. File formats and the command line live in the `scnv`
//! crate.
//!
//! All randomness flows from explicit 64-bit seeds and every reduction runs in
//! a fixed order, so identical inputs give bit-identical outputs.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod data;
pub mod error;
pub mod metrics;
pub mod nn;
pub mod optim;
pub mod rng;
pub mod tensor;
pub mod train;

pub use error::{Error, Result};
pub use tensor::Tensor;
