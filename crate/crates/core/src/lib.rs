//! Multislice electron diffraction with a classical FFT engine and a
//! gate-level quantum-circuit engine whose diagonal operators are compiled
//! from truncated Walsh spectra.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circuit;
pub mod cli;
pub mod config;
pub mod error;
pub mod field;
pub mod multislice;
pub mod output;
pub mod physics;
pub mod synthesis;
pub mod walsh;

pub use error::{Error, Result};
