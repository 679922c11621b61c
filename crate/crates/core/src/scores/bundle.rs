use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::nuisance::FeatureMap;
use crate::numerics::Matrix;
use crate::{Error, Result};

/// A nuisance function of the covariate vector.
pub type NuisanceFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

pub fn nuisance_fn(f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> NuisanceFn {
    Arc::new(f)
}

pub fn constant_fn(value: f64) -> NuisanceFn {
    Arc::new(move |_| value)
}

fn mix_fn(a: &NuisanceFn, b: &NuisanceFn, t: f64) -> NuisanceFn {
    let (a, b) = (a.clone(), b.clone());
    Arc::new(move |x| (1.0 - t) * a(x) + t * b(x))
}

fn mix_pair(a: &[NuisanceFn; 2], b: &[NuisanceFn; 2], t: f64) -> [NuisanceFn; 2] {
    [mix_fn(&a[0], &b[0], t), mix_fn(&a[1], &b[1], t)]
}

/// Nuisances of the mean-exchangeability score for one treatment arm `a`,
/// indexed by source `s`.
#[derive(Clone)]
pub struct MeNuisance {
    /// `P(A = a, S = s | x)`.
    pub propensity: [NuisanceFn; 2],
    /// `E[Y | A = a, S = s, x]`.
    pub outcome: [NuisanceFn; 2],
}

/// Nuisances attached to one instrument, indexed by instrument value `z`.
#[derive(Clone)]
pub struct IvArmNuisance {
    /// `P(Z = 1 | x)`.
    pub instrument: NuisanceFn,
    /// `E[D | Z = z, x]`.
    pub uptake: [NuisanceFn; 2],
    /// `E[Y | Z = z, x]`.
    pub outcome: [NuisanceFn; 2],
}

impl IvArmNuisance {
    fn mix(&self, other: &Self, t: f64) -> Self {
        IvArmNuisance {
            instrument: mix_fn(&self.instrument, &other.instrument, t),
            uptake: mix_pair(&self.uptake, &other.uptake, t),
            outcome: mix_pair(&self.outcome, &other.outcome, t),
        }
    }
}

#[derive(Clone)]
pub struct IvNuisance {
    pub arms: [IvArmNuisance; 2],
}

impl IvNuisance {
    /// Exchanges the roles of the two instruments.
    pub fn swapped(&self) -> Self {
        IvNuisance {
            arms: [self.arms[1].clone(), self.arms[0].clone()],
        }
    }
}

/// Fitted linear regression plus the inverse feature Gram matrix used by
/// its influence function.
#[derive(Clone, Debug, PartialEq)]
pub struct ParametricNuisance {
    pub coefficients: Vec<f64>,
    pub gram_inverse: Matrix,
    pub features: FeatureMap,
}

#[derive(Clone)]
pub struct CovarianceNuisance {
    /// `E[Y | x]`.
    pub outcome_mean: NuisanceFn,
    /// `E[Z | x]`.
    pub partner_mean: NuisanceFn,
}

#[derive(Clone)]
pub enum NuisanceBundle {
    MeanExchangeability(MeNuisance),
    Iv(IvNuisance),
    Parametric(ParametricNuisance),
    Covariance(CovarianceNuisance),
}

impl fmt::Debug for NuisanceBundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NuisanceBundle::MeanExchangeability(_) => f.write_str("NuisanceBundle::MeanExchangeability(..)"),
            NuisanceBundle::Iv(_) => f.write_str("NuisanceBundle::Iv(..)"),
            NuisanceBundle::Parametric(p) => f.debug_tuple("NuisanceBundle::Parametric").field(p).finish(),
            NuisanceBundle::Covariance(_) => f.write_str("NuisanceBundle::Covariance(..)"),
        }
    }
}

impl NuisanceBundle {
    /// The pointwise path `(1 - t)·self + t·other`.
    pub fn mix(&self, other: &NuisanceBundle, t: f64) -> Result<NuisanceBundle> {
        Ok(match (self, other) {
            (NuisanceBundle::MeanExchangeability(a), NuisanceBundle::MeanExchangeability(b)) => {
                NuisanceBundle::MeanExchangeability(MeNuisance {
                    propensity: mix_pair(&a.propensity, &b.propensity, t),
                    outcome: mix_pair(&a.outcome, &b.outcome, t),
                })
            }
            (NuisanceBundle::Iv(a), NuisanceBundle::Iv(b)) => NuisanceBundle::Iv(IvNuisance {
                arms: [a.arms[0].mix(&b.arms[0], t), a.arms[1].mix(&b.arms[1], t)],
            }),
            (NuisanceBundle::Parametric(a), NuisanceBundle::Parametric(b)) => {
                if a.features != b.features
                    || a.coefficients.len() != b.coefficients.len()
                    || a.gram_inverse.rows() != b.gram_inverse.rows()
                {
                    return Err(Error::InvalidInput("parametric bundles have different shapes".into()));
                }
                let coefficients = a
                    .coefficients
                    .iter()
                    .zip(&b.coefficients)
                    .map(|(x, y)| (1.0 - t) * x + t * y)
                    .collect();
                let mixed = a
                    .gram_inverse
                    .as_slice()
                    .iter()
                    .zip(b.gram_inverse.as_slice())
                    .map(|(x, y)| (1.0 - t) * x + t * y)
                    .collect();
                let gram_inverse = Matrix::from_vec(a.gram_inverse.rows(), a.gram_inverse.cols(), mixed)?;
                NuisanceBundle::Parametric(ParametricNuisance {
                    coefficients,
                    gram_inverse,
                    features: a.features,
                })
            }
            (NuisanceBundle::Covariance(a), NuisanceBundle::Covariance(b)) => {
                NuisanceBundle::Covariance(CovarianceNuisance {
                    outcome_mean: mix_fn(&a.outcome_mean, &b.outcome_mean, t),
                    partner_mean: mix_fn(&a.partner_mean, &b.partner_mean, t),
                })
            }
            _ => {
                return Err(Error::InvalidInput(
                    "cannot mix nuisance bundles of different kinds".into(),
                ))
            }
        })
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            NuisanceBundle::MeanExchangeability(_) => "mean_exchangeability",
            NuisanceBundle::Iv(_) => "iv_compatibility",
            NuisanceBundle::Parametric(_) => "parametric_spec",
            NuisanceBundle::Covariance(_) => "conditional_covariance",
        }
    }
}
