//! TOML configuration for single tests and simulation grids.
//!
//! A test configuration has three tables, all keys optional except
//! `score.kind`:
//!
//! ```toml
//! [score]
//! kind = "mean_exchangeability"   # iv_compatibility | parametric_spec | conditional_covariance
//! arm = 0
//! outcome = "Y"
//! treatment = "A"
//! source = "S"
//! instruments = ["Z1", "Z2"]
//! uptake = "D"
//! partner = "Z"
//! covariates = ["X1", "X2"]
//! binary = []                     # further columns declared 0/1
//! clip_propensity = 0.01
//! clip_denominator = 0.05
//! interactions = false            # pairwise products in nuisance regressions
//! model = "linear"                # parametric_spec only
//!
//! [basis]
//! family = "legendre"             # fourier
//! jstar = 3
//! combination = "additive"        # tensor
//! ranges = [[-1.0, 1.0], [-1.0, 1.0]]   # default: observed covariate ranges
//!
//! [test]
//! method = "gp_standardized"      # gp_unstandardized | wald_projection
//! alpha = 0.05
//! mc_draws = 100000
//! seed = 0
//! folds = 5
//! weighting = [[1.0, 0.0], [0.0, 1.0]]  # default: identity
//! ```

use std::path::Path;

use gptest_core::basis::{BasisFamily, BasisSpec, Combination};
use gptest_core::dataset::{ColumnKind, Dataset};
use gptest_core::dgp::UParam;
use gptest_core::engine::{Method, TestConfig, Weighting};
use gptest_core::nuisance::FeatureMap;
use gptest_core::numerics::{Matrix, SymMatrix};
use gptest_core::scores::{ColumnRoles, RegressionModel, ScoreKind, ScoreSpec};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::csvio::ColumnSchema;
use crate::error::{AppError, AppResult};

pub fn load_toml<T: DeserializeOwned>(path: &Path) -> AppResult<T> {
    let text = std::fs::read_to_string(path).map_err(|source| AppError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    toml::from_str(&text).map_err(|e| AppError::ConfigParse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn d_outcome() -> String {
    "Y".into()
}
fn d_treatment() -> String {
    "A".into()
}
fn d_source() -> String {
    "S".into()
}
fn d_instruments() -> [String; 2] {
    ["Z1".into(), "Z2".into()]
}
fn d_uptake() -> String {
    "D".into()
}
fn d_partner() -> String {
    "Z".into()
}
fn d_covariates() -> Vec<String> {
    vec!["X1".into(), "X2".into()]
}
fn d_clip_propensity() -> f64 {
    0.01
}
fn d_clip_denominator() -> f64 {
    0.05
}
fn d_model() -> String {
    "linear".into()
}
fn d_family() -> String {
    "legendre".into()
}
fn d_jstar() -> usize {
    3
}
fn d_combination() -> String {
    "additive".into()
}
fn d_method() -> String {
    Method::GpStandardized.as_str().into()
}
fn d_alpha() -> f64 {
    0.05
}
fn d_mc_draws() -> usize {
    100_000
}
fn d_folds() -> usize {
    5
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ScoreSection {
    pub kind: String,
    #[serde(default)]
    pub arm: u8,
    #[serde(default = "d_outcome")]
    pub outcome: String,
    #[serde(default = "d_treatment")]
    pub treatment: String,
    #[serde(default = "d_source")]
    pub source: String,
    #[serde(default = "d_instruments")]
    pub instruments: [String; 2],
    #[serde(default = "d_uptake")]
    pub uptake: String,
    #[serde(default = "d_partner")]
    pub partner: String,
    #[serde(default = "d_covariates")]
    pub covariates: Vec<String>,
    #[serde(default)]
    pub binary: Vec<String>,
    #[serde(default = "d_clip_propensity")]
    pub clip_propensity: f64,
    #[serde(default = "d_clip_denominator")]
    pub clip_denominator: f64,
    #[serde(default)]
    pub interactions: bool,
    #[serde(default = "d_model")]
    pub model: String,
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BasisSection {
    #[serde(default = "d_family")]
    pub family: String,
    #[serde(default = "d_jstar")]
    pub jstar: usize,
    #[serde(default = "d_combination")]
    pub combination: String,
    #[serde(default)]
    pub ranges: Option<Vec<[f64; 2]>>,
}

impl Default for BasisSection {
    fn default() -> Self {
        BasisSection {
            family: d_family(),
            jstar: d_jstar(),
            combination: d_combination(),
            ranges: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TestSection {
    #[serde(default = "d_method")]
    pub method: String,
    #[serde(default = "d_alpha")]
    pub alpha: f64,
    #[serde(default = "d_mc_draws")]
    pub mc_draws: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "d_folds")]
    pub folds: usize,
    #[serde(default)]
    pub weighting: Option<Vec<Vec<f64>>>,
}

impl Default for TestSection {
    fn default() -> Self {
        TestSection {
            method: d_method(),
            alpha: d_alpha(),
            mc_draws: d_mc_draws(),
            seed: 0,
            folds: d_folds(),
            weighting: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TestFile {
    pub score: ScoreSection,
    #[serde(default)]
    pub basis: BasisSection,
    #[serde(default)]
    pub test: TestSection,
}

pub fn parse_method(s: &str) -> AppResult<Method> {
    Method::parse(s).ok_or_else(|| AppError::InvalidConfig(format!("unknown method `{s}`")))
}

pub fn parse_family(s: &str) -> AppResult<BasisFamily> {
    match s {
        "legendre" => Ok(BasisFamily::LegendreOrthonormal),
        "fourier" => Ok(BasisFamily::Fourier),
        _ => Err(AppError::InvalidConfig(format!("unknown basis family `{s}`"))),
    }
}

pub fn parse_combination(s: &str) -> AppResult<Combination> {
    match s {
        "additive" => Ok(Combination::Additive),
        "tensor" => Ok(Combination::TensorProduct),
        _ => Err(AppError::InvalidConfig(format!("unknown basis combination `{s}`"))),
    }
}

pub fn parse_u_param(s: &str) -> AppResult<UParam> {
    match s {
        "var" | "variance" => Ok(UParam::Variance),
        "sd" => Ok(UParam::StdDev),
        _ => Err(AppError::InvalidConfig(format!(
            "unknown u-param `{s}` (expected var or sd)"
        ))),
    }
}

impl ScoreSection {
    pub fn score_kind(&self) -> AppResult<ScoreKind> {
        let features = FeatureMap {
            interactions: self.interactions,
        };
        Ok(match self.kind.as_str() {
            "mean_exchangeability" => ScoreKind::MeanExchangeability { arm: self.arm },
            "iv_compatibility" => ScoreKind::IvCompatibility,
            "parametric_spec" => ScoreKind::ParametricSpec {
                model: match self.model.as_str() {
                    "linear" => RegressionModel::Linear(features),
                    other => RegressionModel::Nonlinear(other.to_string()),
                },
            },
            "conditional_covariance" => ScoreKind::ConditionalCovariance,
            other => return Err(AppError::InvalidConfig(format!("unknown score kind `{other}`"))),
        })
    }

    pub fn score_spec(&self) -> AppResult<ScoreSpec> {
        let mut spec = ScoreSpec::new(self.score_kind()?).with_roles(ColumnRoles {
            outcome: self.outcome.clone(),
            treatment: self.treatment.clone(),
            source: self.source.clone(),
            instruments: self.instruments.clone(),
            uptake: self.uptake.clone(),
            partner: self.partner.clone(),
            covariates: self.covariates.clone(),
        });
        spec.clip_propensity = self.clip_propensity;
        spec.clip_denominator = self.clip_denominator;
        spec.features = FeatureMap {
            interactions: self.interactions,
        };
        Ok(spec)
    }

    /// Columns to read for this score. Treatment, source and instrument
    /// roles are always binary; other columns are binary when listed in
    /// `binary`.
    pub fn schema(&self) -> AppResult<Vec<ColumnSchema>> {
        let spec = self.score_spec()?;
        let forced: Vec<&str> = match spec.kind {
            ScoreKind::MeanExchangeability { .. } => vec![&self.treatment, &self.source],
            ScoreKind::IvCompatibility => vec![&self.instruments[0], &self.instruments[1]],
            _ => Vec::new(),
        };
        let mut out: Vec<ColumnSchema> = Vec::new();
        for name in spec.roles.required(&spec.kind) {
            if out.iter().any(|c| c.name == name) {
                return Err(AppError::InvalidConfig(format!(
                    "column `{name}` is bound to two roles"
                )));
            }
            let binary = forced.contains(&name.as_str()) || self.binary.contains(&name);
            let kind = if binary {
                ColumnKind::Binary
            } else {
                ColumnKind::Continuous
            };
            out.push(ColumnSchema::new(name, kind));
        }
        Ok(out)
    }
}

impl BasisSection {
    pub fn basis_spec(&self, data: Option<&Dataset>, covariates: &[String]) -> AppResult<BasisSpec> {
        let ranges: Vec<(f64, f64)> = match (&self.ranges, data) {
            (Some(r), _) => r.iter().map(|[lo, hi]| (*lo, *hi)).collect(),
            (None, Some(d)) => d
                .empirical_ranges(covariates, 0.0)
                .map_err(|e| AppError::InvalidConfig(e.to_string()))?,
            (None, None) => vec![(-1.0, 1.0); covariates.len()],
        };
        if ranges.len() != covariates.len() {
            return Err(AppError::InvalidConfig(format!(
                "{} basis ranges given for {} covariates",
                ranges.len(),
                covariates.len()
            )));
        }
        BasisSpec::new(
            parse_family(&self.family)?,
            self.jstar,
            parse_combination(&self.combination)?,
            ranges,
        )
        .map_err(|e| AppError::InvalidConfig(e.to_string()))
    }
}

impl TestSection {
    pub fn test_config(&self) -> AppResult<TestConfig> {
        let weighting = match &self.weighting {
            None => Weighting::Identity,
            Some(rows) => {
                let m = Matrix::from_rows(rows).map_err(|e| AppError::InvalidConfig(format!("weighting: {e}")))?;
                Weighting::Fixed(SymMatrix::new(m).map_err(|e| AppError::InvalidConfig(format!("weighting: {e}")))?)
            }
        };
        let cfg = TestConfig {
            alpha: self.alpha,
            weighting,
            mc_draws: self.mc_draws,
            seed: self.seed,
        };
        cfg.validate().map_err(|e| AppError::InvalidConfig(e.to_string()))?;
        if self.folds < 2 {
            return Err(AppError::InvalidConfig("folds must be at least 2".into()));
        }
        Ok(cfg)
    }
}
