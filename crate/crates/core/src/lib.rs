//! Online software defect prediction under defect overlooking.
//!
//! Modules are tested one at a time in a shuffled order. Before each test a
//! ridge logistic regression model is rebuilt from every module tested so
//! far, using correlation-based feature selection. When the model predicts a
//! defective module as clean, the defect may be overlooked during testing
//! and the module enters the learning set with the wrong label. The
//! simulator measures how much that feedback costs in AUC and F1.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command
//! line front end, and report emission live in the `overlook` crate.

#![no_std]
#![deny(unsafe_code)]
#![warn(missing_debug_implementations)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod dataset;
mod error;
mod linalg;
pub mod logistic;
pub mod metrics;
pub mod rng;
pub mod select;
pub mod sim;

pub use error::{Error, Result};
