use alloc::vec::Vec;

use super::bundle::NuisanceBundle;
use super::functions::{
    g_conditional_covariance, g_iv_compatibility, g_mean_exchangeability, g_parametric_spec,
    plug_in_conditional_covariance, plug_in_iv_compatibility, plug_in_mean_exchangeability, plug_in_parametric_spec,
    ClipPolicy, ClipStats, CovObservation, IvObservation, MeObservation, RegressionObservation,
};
use super::orthogonality::ScoreForm;
use super::{NuisanceMode, ScoreKind, ScoreSpec};
use crate::dataset::Dataset;
use crate::numerics::Matrix;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreEvaluation {
    pub values: Vec<f64>,
    pub clip: ClipStats,
}

/// Dataset columns bound to the roles of a score kind.
pub(crate) struct BoundScore<'a> {
    pub kind: &'a ScoreKind,
    pub covariates: Matrix,
    cols: [&'a [f64]; 4],
    policy: ClipPolicy,
}

impl<'a> BoundScore<'a> {
    pub fn bind(data: &'a Dataset, spec: &'a ScoreSpec) -> Result<Self> {
        spec.validate()?;
        let r = &spec.roles;
        let empty: &[f64] = &[];
        let cols = match &spec.kind {
            ScoreKind::MeanExchangeability { .. } => [
                data.column(&r.outcome)?,
                data.binary_column(&r.treatment)?,
                data.binary_column(&r.source)?,
                empty,
            ],
            ScoreKind::IvCompatibility => [
                data.column(&r.outcome)?,
                data.column(&r.uptake)?,
                data.binary_column(&r.instruments[0])?,
                data.binary_column(&r.instruments[1])?,
            ],
            ScoreKind::ParametricSpec { .. } => [data.column(&r.outcome)?, empty, empty, empty],
            ScoreKind::ConditionalCovariance => [data.column(&r.outcome)?, data.column(&r.partner)?, empty, empty],
        };
        Ok(BoundScore {
            kind: &spec.kind,
            covariates: data.matrix(&r.covariates)?,
            cols,
            policy: spec.clip_policy(),
        })
    }

    pub fn value(&self, row: usize, bundle: &NuisanceBundle, form: ScoreForm, stats: &mut ClipStats) -> Result<f64> {
        let x = self.covariates.row(row);
        let c = &self.cols;
        let p = &self.policy;
        let g = match (self.kind, bundle) {
            (ScoreKind::MeanExchangeability { arm }, NuisanceBundle::MeanExchangeability(nb)) => {
                let obs = MeObservation {
                    outcome: c[0][row],
                    treatment: c[1][row],
                    source: c[2][row],
                    covariates: x,
                };
                match form {
                    ScoreForm::Orthogonal => g_mean_exchangeability(&obs, nb, *arm, p, stats),
                    ScoreForm::PlugIn => plug_in_mean_exchangeability(&obs, nb),
                }
            }
            (ScoreKind::IvCompatibility, NuisanceBundle::Iv(nb)) => {
                let obs = IvObservation {
                    outcome: c[0][row],
                    uptake: c[1][row],
                    instruments: [c[2][row], c[3][row]],
                    covariates: x,
                };
                match form {
                    ScoreForm::Orthogonal => g_iv_compatibility(&obs, nb, p, stats),
                    ScoreForm::PlugIn => plug_in_iv_compatibility(&obs, nb, p, stats),
                }
            }
            (ScoreKind::ParametricSpec { .. }, NuisanceBundle::Parametric(nb)) => {
                let obs = RegressionObservation {
                    outcome: c[0][row],
                    covariates: x,
                };
                match form {
                    ScoreForm::Orthogonal => g_parametric_spec(&obs, nb),
                    ScoreForm::PlugIn => plug_in_parametric_spec(&obs, nb),
                }
            }
            (ScoreKind::ConditionalCovariance, NuisanceBundle::Covariance(nb)) => {
                let obs = CovObservation {
                    outcome: c[0][row],
                    partner: c[1][row],
                    covariates: x,
                };
                match form {
                    ScoreForm::Orthogonal => g_conditional_covariance(&obs, nb),
                    ScoreForm::PlugIn => plug_in_conditional_covariance(&obs, nb),
                }
            }
            (kind, bundle) => {
                return Err(Error::InvalidInput(alloc::format!(
                    "{} nuisances supplied for a {} score",
                    bundle.kind_name(),
                    kind.name()
                )))
            }
        };
        if !g.is_finite() {
            return Err(Error::NumericalFailure(alloc::format!("non-finite score at row {row}")));
        }
        Ok(g)
    }
}

/// Evaluates the orthogonal score on every row with the oracle bundle of
/// `spec`, or with `bundle` when given.
pub fn evaluate_score(data: &Dataset, spec: &ScoreSpec, bundle: Option<&NuisanceBundle>) -> Result<ScoreEvaluation> {
    let rows: Vec<usize> = (0..data.n()).collect();
    evaluate_score_rows(data, spec, bundle, &rows)
}

pub fn evaluate_score_rows(
    data: &Dataset,
    spec: &ScoreSpec,
    bundle: Option<&NuisanceBundle>,
    rows: &[usize],
) -> Result<ScoreEvaluation> {
    let bundle = match (bundle, &spec.nuisance_mode) {
        (Some(b), _) => b,
        (None, NuisanceMode::Oracle(b)) => b,
        (None, NuisanceMode::CrossFit) => {
            return Err(Error::InvalidInput(
                "no nuisance bundle to evaluate the score with".into(),
            ))
        }
    };
    let bound = BoundScore::bind(data, spec)?;
    let mut clip = ClipStats::default();
    let values = rows
        .iter()
        .map(|&i| bound.value(i, bundle, ScoreForm::Orthogonal, &mut clip))
        .collect::<Result<Vec<_>>>()?;
    Ok(ScoreEvaluation { values, clip })
}
