//! Predicting per-hole chemical assays and material presence from
//! measure-while-drilling (MWD) signals.
//!
//! The crate covers the whole batch pipeline:
//!
//! - [`datamodel`]: hole signal records, labels, CSV formats and joins
//! - [`features`]: Hjorth parameters, waveform length, energy, crest factor,
//!   flatness, SVD entropy, descriptive statistics, pressure-ratio indicators
//! - [`models`]: random forests (uni- and multivariate), Gaussian-process
//!   regression and an RBF support vector machine
//! - [`validation`]: random and leave-one-blast-out cross-validation,
//!   agreement statistics (Bland-Altman, Pearson, RMSE), QQ points,
//!   confusion matrices
//! - [`synth`]: a layered synthetic site with known ground truth
//! - [`report`]: report text and SVG plots
//! - [`cli`]: the `mwd` batch commands
//!
//! See the `examples/` directory for one runnable program per capability.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod datamodel;
pub mod features;
pub mod linalg;
pub mod models;
pub mod report;
pub mod synth;
pub mod validation;

/// Crate version recorded in every emitted artifact.
pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));
