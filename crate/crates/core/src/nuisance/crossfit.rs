use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use super::folds::{make_folds, FoldAssignment};
use super::linear::{fit_logistic_with, fit_ols_with, FeatureMap, LinearFit, Link};
use crate::dataset::{ColumnKind, Dataset};
use crate::numerics::{spd_inverse, Matrix, RngStream};
use crate::scores::{
    evaluate_score_rows, ClipStats, CovarianceNuisance, IvArmNuisance, IvNuisance, MeNuisance, NuisanceBundle,
    NuisanceFn, NuisanceMode, ParametricNuisance, RegressionModel, ScoreKind, ScoreSpec,
};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct NamedFit {
    pub name: String,
    pub fit: LinearFit,
}

#[derive(Clone, Debug)]
pub struct FittedNuisances {
    pub bundle: NuisanceBundle,
    pub fits: Vec<NamedFit>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CrossFitDiagnostics {
    pub propensity_clipped: usize,
    pub denominator_clipped: usize,
    /// Training rows drawn from the fold being predicted; always zero.
    pub training_rows_from_own_fold: usize,
    pub nonconverged_fits: usize,
}

#[derive(Debug, Clone)]
pub struct CrossFitResult {
    pub pseudo_outcomes: Vec<f64>,
    /// `None` in oracle mode.
    pub folds: Option<FoldAssignment>,
    pub per_fold_fits: Vec<Vec<NamedFit>>,
    pub diagnostics: CrossFitDiagnostics,
}

/// Computes out-of-fold pseudo-outcomes: nuisances for fold `k` are fitted
/// on the rows of the other folds only.
pub fn crossfit(data: &Dataset, spec: &ScoreSpec, folds: usize, rng: &mut RngStream) -> Result<CrossFitResult> {
    spec.validate()?;
    for name in spec.roles.required(&spec.kind) {
        data.column(&name)?;
    }
    if let NuisanceMode::Oracle(bundle) = &spec.nuisance_mode {
        let rows: Vec<usize> = (0..data.n()).collect();
        let eval = evaluate_score_rows(data, spec, Some(bundle), &rows)?;
        return Ok(CrossFitResult {
            pseudo_outcomes: eval.values,
            folds: None,
            per_fold_fits: Vec::new(),
            diagnostics: CrossFitDiagnostics {
                propensity_clipped: eval.clip.propensity,
                denominator_clipped: eval.clip.denominator,
                ..CrossFitDiagnostics::default()
            },
        });
    }
    let assignment = make_folds(data.n(), folds, rng)?;
    let mut pseudo = vec![0.0; data.n()];
    let mut per_fold_fits = Vec::with_capacity(folds);
    let mut diagnostics = CrossFitDiagnostics::default();
    let mut clip = ClipStats::default();
    for k in 0..folds {
        let train = assignment.rows_outside(k);
        diagnostics.training_rows_from_own_fold += train.iter().filter(|&&i| assignment.fold_of[i] == k).count();
        let fitted = fit_nuisances(data, spec, &train, k)?;
        let held_out = assignment.rows_in(k);
        let eval = evaluate_score_rows(data, spec, Some(&fitted.bundle), &held_out)?;
        for (&i, g) in held_out.iter().zip(eval.values) {
            pseudo[i] = g;
        }
        clip.merge(eval.clip);
        diagnostics.nonconverged_fits += fitted.fits.iter().filter(|f| !f.fit.converged).count();
        per_fold_fits.push(fitted.fits);
    }
    diagnostics.propensity_clipped = clip.propensity;
    diagnostics.denominator_clipped = clip.denominator;
    Ok(CrossFitResult {
        pseudo_outcomes: pseudo,
        folds: Some(assignment),
        per_fold_fits,
        diagnostics,
    })
}

struct Trainer<'a> {
    data: &'a Dataset,
    covariates: Matrix,
    features: FeatureMap,
    fold: usize,
    fits: Vec<NamedFit>,
}

impl<'a> Trainer<'a> {
    fn subset(&self, rows: &[usize]) -> Matrix {
        let d = self.covariates.cols();
        let mut m = Matrix::zeros(rows.len(), d);
        for (r, &i) in rows.iter().enumerate() {
            m.row_mut(r).copy_from_slice(self.covariates.row(i));
        }
        m
    }

    fn insufficient(&self, stratum: String) -> Error {
        Error::InsufficientStratum {
            fold: self.fold,
            stratum,
        }
    }

    /// Fits a propensity model; both classes must be present.
    fn propensity(&mut self, name: &str, column: &str, rows: &[usize]) -> Result<LinearFit> {
        let values = self.data.binary_column(column)?;
        let y: Vec<f64> = rows.iter().map(|&i| values[i]).collect();
        let x = self.subset(rows);
        let ones = y.iter().filter(|&&v| v == 1.0).count();
        if ones == 0 || ones == y.len() {
            let missing = if ones == 0 { 1 } else { 0 };
            return Err(self.insufficient(format!("{column}={missing}")));
        }
        let fit = fit_logistic_with(&x, &y, self.features).map_err(|e| self.rescue(e, name))?;
        self.fits.push(NamedFit {
            name: name.into(),
            fit: fit.clone(),
        });
        Ok(fit)
    }

    /// Fits a conditional mean, routed by the column's declared kind; a
    /// single-class binary response yields a constant fit.
    fn mean(&mut self, name: &str, column: &str, rows: &[usize]) -> Result<LinearFit> {
        let p = self.features.width(self.covariates.cols());
        if rows.len() <= p {
            return Err(self.insufficient(String::from(name)));
        }
        let values = self.data.column(column)?;
        let y: Vec<f64> = rows.iter().map(|&i| values[i]).collect();
        let x = self.subset(rows);
        let fit = match self.data.kind(column)? {
            ColumnKind::Continuous => fit_ols_with(&x, &y, self.features),
            ColumnKind::Binary => {
                let ones = y.iter().filter(|&&v| v == 1.0).count();
                if ones == 0 || ones == y.len() {
                    Ok(LinearFit::constant(ones as f64 / y.len() as f64, x.cols(), Link::Logit))
                } else {
                    fit_logistic_with(&x, &y, self.features)
                }
            }
        }
        .map_err(|e| self.rescue(e, name))?;
        self.fits.push(NamedFit {
            name: name.into(),
            fit: fit.clone(),
        });
        Ok(fit)
    }

    fn rescue(&self, e: Error, name: &str) -> Error {
        match e {
            Error::InvalidInput(_) | Error::DegenerateLabels => self.insufficient(String::from(name)),
            other => other,
        }
    }
}

fn predictor(fit: LinearFit) -> NuisanceFn {
    Arc::new(move |x| fit.predict(x))
}

fn product(a: LinearFit, b: LinearFit) -> NuisanceFn {
    Arc::new(move |x| a.predict(x) * b.predict(x))
}

fn select(values: &[f64], rows: &[usize], level: f64) -> Vec<usize> {
    rows.iter().copied().filter(|&i| values[i] == level).collect()
}

/// Fits every nuisance the score declares on the given training rows.
pub fn fit_nuisances(data: &Dataset, spec: &ScoreSpec, train: &[usize], fold: usize) -> Result<FittedNuisances> {
    let roles = &spec.roles;
    let mut t = Trainer {
        data,
        covariates: data.matrix(&roles.covariates)?,
        features: spec.features,
        fold,
        fits: Vec::new(),
    };
    let bundle = match &spec.kind {
        ScoreKind::MeanExchangeability { arm } => {
            let level = f64::from(*arm);
            let source = data.binary_column(&roles.source)?;
            let treatment = data.binary_column(&roles.treatment)?;
            let source_fit = t.propensity("source", &roles.source, train)?;
            let mut propensity = Vec::with_capacity(2);
            let mut outcome = Vec::with_capacity(2);
            for s in [0.0, 1.0] {
                let in_source = select(source, train, s);
                let cell = select(treatment, &in_source, level);
                let label = format!("{}={arm},{}={s}", roles.treatment, roles.source);
                if cell.is_empty() {
                    return Err(t.insufficient(label));
                }
                let treat_fit = if cell.len() == in_source.len() {
                    LinearFit::constant(1.0, t.covariates.cols(), Link::Logit)
                } else {
                    let fit = t.propensity(&format!("treatment|{}={s}", roles.source), &roles.treatment, &in_source)?;
                    if *arm == 0 {
                        flip(fit)
                    } else {
                        fit
                    }
                };
                let source_prob = if s == 1.0 {
                    source_fit.clone()
                } else {
                    flip(source_fit.clone())
                };
                propensity.push(product(source_prob, treat_fit));
                let mean = t.mean(&format!("outcome|{label}"), &roles.outcome, &cell)?;
                outcome.push(predictor(mean));
            }
            let [p0, p1]: [NuisanceFn; 2] = propensity.try_into().ok().expect("two sources");
            let [m0, m1]: [NuisanceFn; 2] = outcome.try_into().ok().expect("two sources");
            NuisanceBundle::MeanExchangeability(MeNuisance {
                propensity: [p0, p1],
                outcome: [m0, m1],
            })
        }
        ScoreKind::IvCompatibility => {
            let mut arms = Vec::with_capacity(2);
            for z_name in &roles.instruments {
                let z = data.binary_column(z_name)?;
                let instrument = t.propensity(&format!("instrument|{z_name}"), z_name, train)?;
                let mut uptake = Vec::with_capacity(2);
                let mut outcome = Vec::with_capacity(2);
                for level in [0.0, 1.0] {
                    let rows = select(z, train, level);
                    let label = format!("{z_name}={level}");
                    uptake.push(predictor(t.mean(&format!("uptake|{label}"), &roles.uptake, &rows)?));
                    outcome.push(predictor(t.mean(&format!("outcome|{label}"), &roles.outcome, &rows)?));
                }
                arms.push(IvArmNuisance {
                    instrument: predictor(instrument),
                    uptake: [uptake[0].clone(), uptake[1].clone()],
                    outcome: [outcome[0].clone(), outcome[1].clone()],
                });
            }
            let second = arms.pop().expect("two instruments");
            let first = arms.pop().expect("two instruments");
            NuisanceBundle::Iv(IvNuisance { arms: [first, second] })
        }
        ScoreKind::ParametricSpec { model } => {
            let features = match model {
                RegressionModel::Linear(map) => *map,
                RegressionModel::Nonlinear(name) => {
                    return Err(Error::Unsupported(format!("non-linear regression model `{name}`")))
                }
            };
            let x = t.subset(train);
            let y = data.column(&roles.outcome)?;
            let y: Vec<f64> = train.iter().map(|&i| y[i]).collect();
            let fit = fit_ols_with(&x, &y, features).map_err(|e| t.rescue(e, "regression"))?;
            let gram_inverse = inverse_gram(&features.design(&x))?;
            t.fits.push(NamedFit {
                name: "regression".into(),
                fit: fit.clone(),
            });
            NuisanceBundle::Parametric(ParametricNuisance {
                coefficients: fit.coefficients,
                gram_inverse,
                features,
            })
        }
        ScoreKind::ConditionalCovariance => {
            let outcome = t.mean("outcome", &roles.outcome, train)?;
            let partner = t.mean("partner", &roles.partner, train)?;
            NuisanceBundle::Covariance(CovarianceNuisance {
                outcome_mean: predictor(outcome),
                partner_mean: predictor(partner),
            })
        }
    };
    Ok(FittedNuisances { bundle, fits: t.fits })
}

/// Turns a logistic fit for `P(y = 1)` into one for `P(y = 0)`.
fn flip(mut fit: LinearFit) -> LinearFit {
    for b in fit.coefficients.iter_mut() {
        *b = -*b;
    }
    fit
}

/// Inverse of the empirical second-moment matrix `(1/n) FᵀF`.
pub(crate) fn inverse_gram(design: &Matrix) -> Result<Matrix> {
    let n = design.rows() as f64;
    let p = design.cols();
    let mut gram = Matrix::zeros(p, p);
    for i in 0..design.rows() {
        let f = design.row(i);
        for a in 0..p {
            for b in 0..p {
                gram[(a, b)] += f[a] * f[b] / n;
            }
        }
    }
    spd_inverse(&gram)
}
