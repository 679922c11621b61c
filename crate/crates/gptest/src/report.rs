//! JSON rendering of single-test results and basis diagnostics.

use gptest_core::basis::BasisBounds;
use gptest_core::engine::{TestResult, Warning};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsReport {
    pub propensity_clipped: usize,
    pub denominator_clipped: usize,
    pub nonconverged_fits: usize,
    pub warnings: Vec<&'static str>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TestReport {
    pub method: &'static str,
    pub statistic: f64,
    pub p_value: f64,
    pub reject: bool,
    pub alpha: f64,
    #[serde(rename = "J")]
    pub j: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_hat: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_hat: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_hat: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_hat: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_ls: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wald_df: Option<usize>,
    pub n: usize,
    pub diagnostics: DiagnosticsReport,
}

fn warning_name(w: Warning) -> &'static str {
    match w {
        Warning::DegenerateNull => "degenerate_null",
    }
}

impl TestReport {
    pub fn new(result: &TestResult, alpha: f64, n: usize) -> Self {
        let d = &result.diagnostics;
        TestReport {
            method: result.method.as_str(),
            statistic: result.statistic,
            p_value: result.p_value,
            reject: result.reject,
            alpha,
            j: result.j,
            tau_hat: result.tau_hat.clone(),
            rho_hat: result.rho_hat,
            gamma_hat: result.gamma_hat,
            t_hat: result.t_hat,
            theta_ls: result.theta_ls.clone(),
            wald_df: result.wald_df,
            n,
            diagnostics: DiagnosticsReport {
                propensity_clipped: d.propensity_clipped,
                denominator_clipped: d.denominator_clipped,
                nonconverged_fits: d.nonconverged_fits,
                warnings: d.warnings.iter().copied().map(warning_name).collect(),
            },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BasisReport {
    pub family: String,
    pub jstar: usize,
    pub dims: usize,
    pub combination: String,
    pub num_functions: usize,
    pub xi_hat: f64,
    pub omega_hat: f64,
}

impl BasisReport {
    pub fn new(
        family: &str,
        jstar: usize,
        dims: usize,
        combination: &str,
        num_functions: usize,
        bounds: BasisBounds,
    ) -> Self {
        BasisReport {
            family: family.to_string(),
            jstar,
            dims,
            combination: combination.to_string(),
            num_functions,
            xi_hat: bounds.xi_hat,
            omega_hat: bounds.omega_hat,
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report types serialize infallibly")
}
