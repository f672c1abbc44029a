//! Causal fairness measurement under the Standard Fairness Model.
//!
//! The crate estimates statistical parity (SPM) and predictive parity
//! (PPM/iPPM) of a predictor, decomposes them into counterfactual direct,
//! indirect and spurious effects, audits a predictor against a
//! business-necessity set, constructs predictors at either end of the
//! parity spectrum, and simulates structural causal models with full
//! counterfactual ground truth.

pub mod adjustment;
pub mod audit;
pub mod error;
pub mod estimators;
pub mod model;
mod par;
pub mod scm;

pub use error::{Error, Result};
