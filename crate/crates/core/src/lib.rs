//! Approximate-Bayesian uncertainty quantification for small classifiers.
//!
//! The crate trains dense feed-forward networks from scratch and wraps them
//! in three stochastic predictors — MC-Dropout, MC-DropConnect and deep
//! ensembles — together with the evaluation battery used to compare them:
//! classification error, negative log-likelihood, expected calibration error
//! with reliability-diagram data, and predictive entropy.
//!
//! Everything is seeded and single-threaded by default, so a fixed seed
//! reproduces a training run bit for bit.

pub mod data;
pub mod error;
pub mod metrics;
pub mod nn;
pub mod prob;
pub mod uncertainty;

pub use error::{Error, Result};
pub use prob::ProbabilityVector;
