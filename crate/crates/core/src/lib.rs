//! SMOTE oversampling, genetic-algorithm wrapper feature selection and a
//! random-forest classifier for small, imbalanced tabular datasets, with a
//! stratified cross-validation harness that reports per-class metrics, ROC
//! curves and AUC.

pub mod cli;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod forest;
pub mod gafs;
pub mod rng;
pub mod smote;

pub use error::{Error, Result};
