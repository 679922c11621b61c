//! Projection statistic, its two calibrations and the linear Wald baseline.

mod calibration;
mod statistic;
mod wald;

pub use calibration::weighted_chisq_pvalue;
pub use statistic::{projection_vector, sigma_hat, statistic};
pub use wald::wald_projection_test;

use alloc::vec::Vec;

use crate::basis::{build_design, BasisSpec, DesignMatrix};
use crate::dataset::Dataset;
use crate::nuisance::crossfit;
use crate::numerics::{frob_and_trace, normal_sf, sym_eigen, Matrix, RngStream, SymMatrix};
use crate::scores::ScoreSpec;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Default)]
pub enum Weighting {
    #[default]
    Identity,
    Fixed(SymMatrix),
}

impl Weighting {
    pub(crate) fn resolve(&self, j: usize) -> Result<SymMatrix> {
        match self {
            Weighting::Identity => Ok(SymMatrix::identity(j)),
            Weighting::Fixed(m) if m.dim() != j => Err(Error::InvalidInput(alloc::format!(
                "weighting matrix is {0}x{0} but the basis has {j} functions",
                m.dim()
            ))),
            Weighting::Fixed(m) => Ok(m.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestConfig {
    pub alpha: f64,
    pub weighting: Weighting,
    /// Monte Carlo draws for the weighted chi-square calibration.
    pub mc_draws: usize,
    pub seed: u64,
}

impl Default for TestConfig {
    fn default() -> Self {
        TestConfig {
            alpha: 0.05,
            weighting: Weighting::Identity,
            mc_draws: 100_000,
            seed: 0,
        }
    }
}

impl TestConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidInput("alpha must lie in (0, 1)".into()));
        }
        if self.mc_draws == 0 {
            return Err(Error::InvalidInput("mc_draws must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    GpStandardized,
    GpUnstandardized,
    WaldProjection,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::GpStandardized, Method::GpUnstandardized, Method::WaldProjection];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::GpStandardized => "gp_standardized",
            Method::GpUnstandardized => "gp_unstandardized",
            Method::WaldProjection => "wald_projection",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        Method::ALL.into_iter().find(|m| m.as_str() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Warning {
    /// Every mixture weight is zero, so the null distribution is a point mass.
    DegenerateNull,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TestDiagnostics {
    pub propensity_clipped: usize,
    pub denominator_clipped: usize,
    pub nonconverged_fits: usize,
    pub warnings: Vec<Warning>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestResult {
    pub method: Method,
    pub statistic: f64,
    pub p_value: f64,
    pub reject: bool,
    /// Number of basis functions (or Wald regressors).
    pub j: usize,
    pub tau_hat: Option<Vec<f64>>,
    pub rho_hat: Option<f64>,
    pub gamma_hat: Option<f64>,
    pub t_hat: Option<f64>,
    pub theta_ls: Option<Vec<f64>>,
    pub wald_df: Option<usize>,
    pub diagnostics: TestDiagnostics,
}

impl TestResult {
    fn new(method: Method, statistic: f64, p_value: f64, alpha: f64, j: usize) -> Self {
        TestResult {
            method,
            statistic,
            p_value,
            reject: p_value < alpha,
            j,
            tau_hat: None,
            rho_hat: None,
            gamma_hat: None,
            t_hat: None,
            theta_ls: None,
            wald_df: None,
            diagnostics: TestDiagnostics::default(),
        }
    }
}

/// Calibrates the statistic against the weighted chi-square mixture whose
/// weights are the eigenvalues of `Σ̂`.
pub fn gp_test_unstandardized(design: &DesignMatrix, g: &[f64], config: &TestConfig) -> Result<TestResult> {
    config.validate()?;
    let omega = config.weighting.resolve(design.num_functions())?;
    let a = projection_vector(design, g)?;
    let s = statistic(&a, &omega, g.len())?;
    let sigma = sigma_hat(design, g, &omega)?;
    let taus = sym_eigen(&sigma)?.eigenvalues;
    let mut rng = RngStream::new(config.seed);
    let (p, warning) = weighted_chisq_pvalue(&taus, s, config.mc_draws, &mut rng)?;
    let mut result = TestResult::new(Method::GpUnstandardized, s, p, config.alpha, design.num_functions());
    result.diagnostics.warnings.extend(warning);
    result.tau_hat = Some(taus);
    Ok(result)
}

/// Centres and scales the statistic by the trace and Frobenius norm of `Σ̂`
/// and rejects for large values against the standard normal.
pub fn gp_test_standardized(design: &DesignMatrix, g: &[f64], config: &TestConfig) -> Result<TestResult> {
    config.validate()?;
    let omega = config.weighting.resolve(design.num_functions())?;
    let a = projection_vector(design, g)?;
    let s = statistic(&a, &omega, g.len())?;
    let sigma = sigma_hat(design, g, &omega)?;
    let (rho, gamma) = frob_and_trace(&sigma)?;
    if gamma == 0.0 {
        return Err(Error::DegenerateScale);
    }
    let t = (s - rho) / (core::f64::consts::SQRT_2 * gamma);
    let p = normal_sf(t);
    let mut result = TestResult::new(Method::GpStandardized, s, p, config.alpha, design.num_functions());
    result.rho_hat = Some(rho);
    result.gamma_hat = Some(gamma);
    result.t_hat = Some(t);
    Ok(result)
}

/// Runs `method` on pseudo-outcomes `g` already computed for covariates `x`.
pub fn test_pseudo_outcomes(
    x: &Matrix,
    g: &[f64],
    basis: &BasisSpec,
    config: &TestConfig,
    method: Method,
) -> Result<TestResult> {
    match method {
        Method::GpStandardized => gp_test_standardized(&build_design(x, basis)?, g, config),
        Method::GpUnstandardized => gp_test_unstandardized(&build_design(x, basis)?, g, config),
        Method::WaldProjection => {
            let mut features = Matrix::zeros(x.rows(), x.cols() + 1);
            for i in 0..x.rows() {
                let row = features.row_mut(i);
                row[0] = 1.0;
                row[1..].copy_from_slice(x.row(i));
            }
            wald_projection_test(&features, g, config.alpha)
        }
    }
}

/// Cross-fits the score, builds the basis design on the score's covariates
/// and runs the requested test.
pub fn run_gp_test(
    data: &Dataset,
    score: &ScoreSpec,
    basis: &BasisSpec,
    config: &TestConfig,
    method: Method,
    folds: usize,
    rng: &mut RngStream,
) -> Result<TestResult> {
    config.validate()?;
    let fitted = crossfit(data, score, folds, rng)?;
    let x = data.matrix(&score.roles.covariates)?;
    let mut result = test_pseudo_outcomes(&x, &fitted.pseudo_outcomes, basis, config, method)?;
    let d = &mut result.diagnostics;
    d.propensity_clipped = fitted.diagnostics.propensity_clipped;
    d.denominator_clipped = fitted.diagnostics.denominator_clipped;
    d.nonconverged_fits = fitted.diagnostics.nonconverged_fits;
    Ok(result)
}
