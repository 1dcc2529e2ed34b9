//! Channel estimation for links assisted by a large intelligent surface.
//!
//! The received pilots carry the direct channel `h` and the real, positive
//! assistant channel `eta` reflected by the surface. This crate provides:
//!
//! * [`channel`] and [`signal`]: channel draws, pilot frames, the stacked
//!   design matrix and noisy observations;
//! * [`estimators`]: the least-squares baseline and a dual-ascent estimator
//!   that enforces `eta ≥ 0` and `|eta| ≥ |h|`;
//! * [`crlb`]: Fisher information and Cramér–Rao bounds;
//! * [`harness`]: seeded, parallel Monte Carlo sweeps over SNR;
//! * [`cli`]: config files, CSV output and the `lisce` subcommands.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x >= 0.0)` also rejects NaN

pub mod channel;
pub mod cli;
pub mod crlb;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod numerics;
pub mod signal;

pub use error::{Error, Result};
pub use num_complex::Complex64;
