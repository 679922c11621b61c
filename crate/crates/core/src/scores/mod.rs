//! Conditionally orthogonal score functions and their nuisance bundles.

mod bundle;
mod evaluate;
mod functions;
mod orthogonality;

pub use bundle::{
    constant_fn, nuisance_fn, CovarianceNuisance, IvArmNuisance, IvNuisance, MeNuisance, NuisanceBundle, NuisanceFn,
    ParametricNuisance,
};
pub use evaluate::{evaluate_score, evaluate_score_rows, ScoreEvaluation};
pub use functions::{
    g_conditional_covariance, g_iv_compatibility, g_iv_component, g_mean_exchangeability, g_parametric_spec,
    plug_in_conditional_covariance, plug_in_iv_compatibility, plug_in_mean_exchangeability, plug_in_parametric_spec,
    ClipPolicy, ClipStats, CovObservation, Instrument, IvObservation, MeObservation, RegressionObservation,
};
pub use orthogonality::{orthogonality_diagnostic, DiagnosticWeight, OrthogonalityPath, ScoreForm};

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::nuisance::FeatureMap;
use crate::{Error, Result};

/// Regression model whose specification is being tested.
#[derive(Debug, Clone, PartialEq)]
pub enum RegressionModel {
    Linear(FeatureMap),
    /// Any non-linear `h`; recognised so it can be rejected explicitly.
    Nonlinear(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScoreKind {
    MeanExchangeability { arm: u8 },
    IvCompatibility,
    ParametricSpec { model: RegressionModel },
    ConditionalCovariance,
}

impl ScoreKind {
    pub fn name(&self) -> &'static str {
        match self {
            ScoreKind::MeanExchangeability { .. } => "mean_exchangeability",
            ScoreKind::IvCompatibility => "iv_compatibility",
            ScoreKind::ParametricSpec { .. } => "parametric_spec",
            ScoreKind::ConditionalCovariance => "conditional_covariance",
        }
    }
}

/// Which dataset columns play which role. Only the roles a score kind uses
/// are looked up.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnRoles {
    pub outcome: String,
    pub treatment: String,
    pub source: String,
    pub instruments: [String; 2],
    pub uptake: String,
    pub partner: String,
    pub covariates: Vec<String>,
}

impl Default for ColumnRoles {
    fn default() -> Self {
        ColumnRoles {
            outcome: "Y".into(),
            treatment: "A".into(),
            source: "S".into(),
            instruments: ["Z1".into(), "Z2".into()],
            uptake: "D".into(),
            partner: "Z".into(),
            covariates: vec!["X1".into(), "X2".into()],
        }
    }
}

impl ColumnRoles {
    /// Columns the given score kind reads, covariates last.
    pub fn required(&self, kind: &ScoreKind) -> Vec<String> {
        let mut cols = match kind {
            ScoreKind::MeanExchangeability { .. } => {
                vec![self.outcome.clone(), self.treatment.clone(), self.source.clone()]
            }
            ScoreKind::IvCompatibility => vec![
                self.outcome.clone(),
                self.uptake.clone(),
                self.instruments[0].clone(),
                self.instruments[1].clone(),
            ],
            ScoreKind::ParametricSpec { .. } => vec![self.outcome.clone()],
            ScoreKind::ConditionalCovariance => vec![self.outcome.clone(), self.partner.clone()],
        };
        cols.extend(self.covariates.iter().cloned());
        cols
    }
}

#[derive(Clone, Debug, Default)]
pub enum NuisanceMode {
    #[default]
    CrossFit,
    /// Evaluate at known nuisance functions instead of fitting them.
    Oracle(NuisanceBundle),
}

#[derive(Clone, Debug)]
pub struct ScoreSpec {
    pub kind: ScoreKind,
    pub roles: ColumnRoles,
    pub clip_propensity: f64,
    pub clip_denominator: f64,
    pub nuisance_mode: NuisanceMode,
    /// Features used by the cross-fitted nuisance regressions.
    pub features: FeatureMap,
}

impl ScoreSpec {
    pub fn new(kind: ScoreKind) -> Self {
        ScoreSpec {
            kind,
            roles: ColumnRoles::default(),
            clip_propensity: 0.01,
            clip_denominator: 0.05,
            nuisance_mode: NuisanceMode::CrossFit,
            features: FeatureMap::linear(),
        }
    }

    pub fn with_oracle(mut self, bundle: NuisanceBundle) -> Self {
        self.nuisance_mode = NuisanceMode::Oracle(bundle);
        self
    }

    pub fn with_roles(mut self, roles: ColumnRoles) -> Self {
        self.roles = roles;
        self
    }

    pub fn clip_policy(&self) -> ClipPolicy {
        ClipPolicy {
            propensity: self.clip_propensity,
            denominator: self.clip_denominator,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.clip_propensity > 0.0 && self.clip_propensity < 0.5) {
            return Err(Error::InvalidInput("clip_propensity must lie in (0, 0.5)".into()));
        }
        if !(self.clip_denominator > 0.0 && self.clip_denominator.is_finite()) {
            return Err(Error::InvalidInput("clip_denominator must be positive".into()));
        }
        if self.roles.covariates.is_empty() {
            return Err(Error::InvalidInput("at least one covariate is required".into()));
        }
        match &self.kind {
            ScoreKind::MeanExchangeability { arm } if *arm > 1 => {
                Err(Error::InvalidInput("treatment arm must be 0 or 1".into()))
            }
            ScoreKind::ParametricSpec {
                model: RegressionModel::Nonlinear(name),
            } => Err(Error::Unsupported(alloc::format!(
                "non-linear regression model `{name}`; only linear models are supported"
            ))),
            _ => Ok(()),
        }
    }
}
