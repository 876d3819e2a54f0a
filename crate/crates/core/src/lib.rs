//! Population-level estimation of the fraction of a corpus written by a
//! large language model.
//!
//! A [`model::TokenModel`] holds per-token occurrence probabilities for human
//! text (P) and model text (Q). Scoring a target corpus against it gives one
//! pair of log-likelihoods per unit, and [`estimator`] finds the mixture
//! weight α that best explains them, with bootstrap intervals.

pub mod analysis;
pub mod calibration;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod estimator;
pub mod generation;
pub mod model;
pub mod seed;
pub mod synth;
pub mod text;

pub use error::{Error, Result};
