//! Exact waiting-time and run-count distributions of order k under the
//! q-geometric trial model, where the success probability after `f` failures
//! is `theta * q^f`.
//!
//! The crate is split into:
//! - [`qmath`]: q-shifted factorials, q-numbers and Gaussian coefficients.
//! - [`runcount`]: run counting and pathwise waiting times on concrete sequences.
//! - [`kernels`]: the weighted composition counts behind every PMF.
//! - [`dist`]: PMFs, count distributions and tables.
//! - [`oracle`]: exhaustive enumeration and Monte Carlo references.

pub mod dist;
pub mod error;
pub mod kernels;
pub mod oracle;
pub mod qmath;
pub mod runcount;

pub use error::{Error, Result};
