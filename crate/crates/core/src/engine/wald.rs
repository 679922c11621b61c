use super::{Method, TestResult};
use crate::numerics::{chisq_sf, least_squares, solve_spd, spd_inverse, Matrix};
use crate::{Error, Result};

/// Wald test that the least-squares projection of `g` on the given
/// regressors vanishes, with a heteroskedasticity-robust sandwich covariance.
/// No intercept is added.
pub fn wald_projection_test(features: &Matrix, g: &[f64], alpha: f64) -> Result<TestResult> {
    let (n, d) = (features.rows(), features.cols());
    if n != g.len() {
        return Err(Error::InvalidInput("feature and score lengths differ".into()));
    }
    if n <= d || d == 0 {
        return Err(Error::InvalidInput(alloc::format!(
            "need more rows than regressors ({n} <= {d})"
        )));
    }
    let theta = least_squares(features, g, None)?;
    let mut result = TestResult::new(Method::WaldProjection, 0.0, 1.0, alpha, d);
    result.wald_df = Some(d);
    if theta.iter().all(|&t| t == 0.0) {
        result.theta_ls = Some(theta);
        return Ok(result);
    }
    let nf = n as f64;
    let mut gram = Matrix::zeros(d, d);
    let mut meat = Matrix::zeros(d, d);
    for i in 0..n {
        let x = features.row(i);
        let r = g[i] - x.iter().zip(&theta).map(|(a, b)| a * b).sum::<f64>();
        for a in 0..d {
            for b in 0..d {
                gram[(a, b)] += x[a] * x[b] / nf;
                meat[(a, b)] += x[a] * x[b] * r * r / nf;
            }
        }
    }
    let gram_inv = spd_inverse(&gram)?;
    let sandwich = gram_inv.matmul(&meat)?.matmul(&gram_inv)?;
    let solved = solve_spd(&sandwich, &theta)?;
    let w = nf * theta.iter().zip(&solved).map(|(a, b)| a * b).sum::<f64>();
    if !w.is_finite() {
        return Err(Error::NumericalFailure("non-finite Wald statistic".into()));
    }
    let p = chisq_sf(d as f64, w);
    result.statistic = w;
    result.p_value = p;
    result.reject = p < alpha;
    result.theta_ls = Some(theta);
    Ok(result)
}
