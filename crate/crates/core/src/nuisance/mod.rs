//! Regression learners for nuisance functions and K-fold cross-fitting.

mod crossfit;
mod folds;
mod linear;

pub use crossfit::{crossfit, fit_nuisances, CrossFitDiagnostics, CrossFitResult, FittedNuisances, NamedFit};
pub use folds::{make_folds, FoldAssignment};
pub use linear::{fit_logistic, fit_logistic_with, fit_ols, fit_ols_with, FeatureMap, LinearFit, Link};
