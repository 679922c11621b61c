use alloc::vec;
use alloc::vec::Vec;

use crate::numerics::{expit, least_squares, Matrix};
use crate::{Error, Result};

const LOGISTIC_MAX_ITER: usize = 100;
const LOGISTIC_TOL: f64 = 1e-8;
/// Separation guard on logistic coefficients.
const COEF_CAP: f64 = 30.0;
const MIN_IRLS_WEIGHT: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Link {
    Identity,
    Logit,
}

/// Regression features built from raw covariates: an intercept, the
/// covariates, and optionally all pairwise products.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FeatureMap {
    pub interactions: bool,
}

impl FeatureMap {
    pub fn linear() -> Self {
        FeatureMap { interactions: false }
    }

    pub fn width(&self, d: usize) -> usize {
        1 + d + if self.interactions { d * (d - 1) / 2 } else { 0 }
    }

    pub fn expand_into(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.push(1.0);
        out.extend_from_slice(x);
        if self.interactions {
            for i in 0..x.len() {
                for j in (i + 1)..x.len() {
                    out.push(x[i] * x[j]);
                }
            }
        }
    }

    pub fn expand(&self, x: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.width(x.len()));
        self.expand_into(x, &mut out);
        out
    }

    pub fn design(&self, covariates: &Matrix) -> Matrix {
        let p = self.width(covariates.cols());
        let mut m = Matrix::zeros(covariates.rows(), p);
        let mut buf = Vec::with_capacity(p);
        for i in 0..covariates.rows() {
            self.expand_into(covariates.row(i), &mut buf);
            m.row_mut(i).copy_from_slice(&buf);
        }
        m
    }
}

/// A fitted generalized linear model; coefficients are intercept first.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit {
    pub coefficients: Vec<f64>,
    pub link: Link,
    pub features: FeatureMap,
    pub converged: bool,
    pub iterations: usize,
}

impl LinearFit {
    /// Fit that predicts `value` everywhere (on the response scale).
    pub fn constant(value: f64, d: usize, link: Link) -> Self {
        let features = FeatureMap::linear();
        let mut coefficients = vec![0.0; features.width(d)];
        coefficients[0] = match link {
            Link::Identity => value,
            Link::Logit => {
                let v = value.clamp(1e-12, 1.0 - 1e-12);
                libm::log(v / (1.0 - v))
            }
        };
        LinearFit {
            coefficients,
            link,
            features,
            converged: true,
            iterations: 0,
        }
    }

    pub fn linear_predictor(&self, x: &[f64]) -> f64 {
        let mut eta = self.coefficients[0];
        for (b, v) in self.coefficients[1..].iter().zip(x) {
            eta += b * v;
        }
        if self.features.interactions {
            let d = x.len();
            let mut c = 1 + d;
            for i in 0..d {
                for j in (i + 1)..d {
                    eta += self.coefficients[c] * x[i] * x[j];
                    c += 1;
                }
            }
        }
        eta
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        let eta = self.linear_predictor(x);
        match self.link {
            Link::Identity => eta,
            Link::Logit => expit(eta),
        }
    }
}

fn check_shapes(covariates: &Matrix, y: &[f64], p: usize) -> Result<()> {
    if covariates.rows() != y.len() {
        return Err(Error::InvalidInput("covariate and response lengths differ".into()));
    }
    if covariates.rows() <= p {
        return Err(Error::InvalidInput(alloc::format!(
            "regression needs more rows than features ({} <= {p})",
            covariates.rows()
        )));
    }
    Ok(())
}

/// Ordinary least squares of `y` on `[1, covariates]`.
pub fn fit_ols(covariates: &Matrix, y: &[f64]) -> Result<LinearFit> {
    fit_ols_with(covariates, y, FeatureMap::linear())
}

pub fn fit_ols_with(covariates: &Matrix, y: &[f64], features: FeatureMap) -> Result<LinearFit> {
    check_shapes(covariates, y, features.width(covariates.cols()))?;
    let x = features.design(covariates);
    let coefficients = least_squares(&x, y, None)?;
    Ok(LinearFit {
        coefficients,
        link: Link::Identity,
        features,
        converged: true,
        iterations: 1,
    })
}

/// Logistic regression of a 0/1 response on `[1, covariates]` by iteratively
/// reweighted least squares.
///
/// Stops when `max |Δβ| < 1e-8` or after 100 iterations. Coefficients are
/// clamped to `[-30, 30]`; a fit that hits the clamp reports
/// `converged == false`.
pub fn fit_logistic(covariates: &Matrix, y: &[f64]) -> Result<LinearFit> {
    fit_logistic_with(covariates, y, FeatureMap::linear())
}

pub fn fit_logistic_with(covariates: &Matrix, y: &[f64], features: FeatureMap) -> Result<LinearFit> {
    let p = features.width(covariates.cols());
    check_shapes(covariates, y, p)?;
    let ones = y.iter().filter(|&&v| v == 1.0).count();
    if y.iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err(Error::InvalidInput("logistic response must be 0/1".into()));
    }
    if ones == 0 || ones == y.len() {
        return Err(Error::DegenerateLabels);
    }
    let x = features.design(covariates);
    let n = y.len();
    let mut beta = vec![0.0; p];
    let mut w = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut converged = false;
    let mut capped = false;
    let mut iterations = 0;
    for it in 0..LOGISTIC_MAX_ITER {
        iterations = it + 1;
        for i in 0..n {
            let eta: f64 = x.row(i).iter().zip(&beta).map(|(a, b)| a * b).sum();
            let mu = expit(eta);
            let wi = (mu * (1.0 - mu)).max(MIN_IRLS_WEIGHT);
            w[i] = wi;
            z[i] = eta + (y[i] - mu) / wi;
        }
        let mut next = least_squares(&x, &z, Some(&w))?;
        capped = false;
        for b in next.iter_mut() {
            if !b.is_finite() {
                *b = COEF_CAP.copysign(*b);
                capped = true;
            } else if b.abs() > COEF_CAP {
                *b = b.clamp(-COEF_CAP, COEF_CAP);
                capped = true;
            }
        }
        let delta = next.iter().zip(&beta).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        beta = next;
        if delta < LOGISTIC_TOL {
            converged = !capped;
            break;
        }
    }
    Ok(LinearFit {
        coefficients: beta,
        link: Link::Logit,
        features,
        converged: converged && !capped,
        iterations,
    })
}
