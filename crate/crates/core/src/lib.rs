#![no_std]

//! Cross-learning score (CLS) estimation.
//!
//! The score measures how well a predictor learned on one dataset transfers to
//! another: a model fitted on the target is evaluated on the source, a model
//! fitted on the source is evaluated on the target, and the two errors are
//! averaged. Lower values mean the two tasks share their feature-response
//! relationship.
//!
//! This crate is the allocation-only core (`no_std` + `alloc`):
//!
//! - [`dataset`]: datasets, losses and fold plans.
//! - [`synth`]: synthetic target/source generators with their exact Bayes rules.
//! - [`models`]: from-scratch learners (IRLS, discriminant analysis, SMO, boosting).
//! - [`cls`]: single-model, weighted-average and ensemble estimators plus oracles.
//! - [`zone`]: positive / ambiguous / negative transfer verdicts.
//! - [`metrics`]: Gaussian-fit KL, Bures-Wasserstein and a label-aware OT distance.
//! - [`transfer`]: naive pooling and TrAdaBoost for validating verdicts.
//! - [`enchead`]: encoder-head CLS with a small jointly trained MLP encoder.
//!
//! File formats, experiment sweeps and the command line live in the `cls` crate.

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod cls;
pub mod dataset;
pub mod enchead;
mod error;
pub mod linalg;
pub mod math;
pub mod metrics;
pub mod models;
pub mod rng;
pub mod synth;
pub mod transfer;
pub mod zone;

pub use crate::dataset::{Dataset, FoldPlan, LossKind, TaskKind};
pub use crate::error::{Error, Result};
