//! Analysis toolkit for SICR (significant increase in credit risk) trigger
//! definitions on monthly loan performance panels.
//!
//! A SICR definition `(d, s, k)` flags an account once its delinquency level
//! `g0` has been at or above `d` for `s` consecutive months; the outcome
//! attached to a loan-month is the flag's value `k` months ahead. This crate
//! provides everything needed to study such definitions end to end:
//!
//! - [`event`]: the trigger decision function, outcome labelling and the
//!   definition grid with its `1a(i)`-style labels;
//! - [`synth`]: a seeded synthetic loan portfolio and macro-scenario generator;
//! - [`dataset`]: panel assembly (feature engineering), SICR-rate series,
//!   stratified subsampling and train/validation splitting;
//! - [`logit`]: ridge-stabilised logistic regression fitted by IRLS with Wald
//!   inference;
//! - [`evalx`]: ranking metrics (AUC with bootstrap CIs), generalised Youden
//!   cut-off selection, flexibility/instability measures and the per-definition
//!   evaluation report;
//! - [`shapley`]: additive per-feature attributions for the fitted scores.
//!
//! Numeric kernels are generic over [`Scalar`] (`f32` or `f64`); the panel and
//! simulation layers work in [`Real`] (`f64`), which is the alias the rest of
//! the crate defaults to.

pub mod calendar;
pub mod dataset;
pub mod error;
pub mod evalx;
pub mod event;
pub mod logit;
pub mod matrix;
pub mod scalar;
pub mod seed;
pub mod shapley;
pub mod synth;

pub use calendar::{CalMonth, MonthRange};
pub use error::{Error, Result};
pub use scalar::Scalar;

/// Concrete scalar used by the data and pipeline layers.
pub type Real = f64;
