//! Command-line front end, file formats and the Monte Carlo harness for
//! generalized projection tests.

pub mod cli;
pub mod config;
pub mod csvio;
pub mod error;
pub mod harness;
pub mod report;

pub use error::{AppError, AppResult};
