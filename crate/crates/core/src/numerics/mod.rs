//! Deterministic linear algebra, random-number and quadrature primitives.

mod eigen;
mod lstsq;
mod matrix;
mod quadrature;
mod rng;
mod special;

pub use eigen::{frob_and_trace, psd_sqrt, sym_eigen, EigenDecomposition};
pub use lstsq::{least_squares, solve_spd, spd_inverse};
pub use matrix::{Matrix, SymMatrix};
pub use quadrature::gauss_legendre;
pub use rng::{mix_seed, RngStream};
pub use special::{chisq_sf, expit, logit, normal_cdf, normal_sf};
