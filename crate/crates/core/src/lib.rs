//! Generalized projection tests for null hypotheses of the form
//! `E[g(O; η) | X] = 0`.
//!
//! The crate is `no_std` (it needs `alloc`) and holds the pure algorithmic
//! parts of the method:
//!
//! * [`numerics`]: dense symmetric eigen-solver, PSD square roots, seeded
//!   random streams, Gauss–Legendre rules and a few special functions.
//! * [`basis`]: orthonormal Legendre / Fourier series bases and the design
//!   matrix `B_n(X_i)`.
//! * [`nuisance`]: OLS and logistic learners and K-fold cross-fitting.
//! * [`scores`]: conditionally orthogonal scores (data fusion mean
//!   exchangeability, IV compatibility, parametric specification,
//!   conditional covariance) and a pathwise orthogonality diagnostic.
//! * [`engine`]: the quadratic-form statistic `S_n`, its weighted chi-square
//!   and standardized-normal calibrations, and the fixed-dimension Wald test.
//! * [`dgp`]: the two simulation designs with their analytic nuisances.
//!
//! IO, configuration, threading and the command line live in the `gptest`
//! crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod basis;
pub mod dataset;
pub mod dgp;
pub mod engine;
mod error;
pub mod nuisance;
pub mod numerics;
pub mod scores;

pub use error::{Error, Result, SchemaError};
