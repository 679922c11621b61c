use super::bundle::{CovarianceNuisance, IvArmNuisance, IvNuisance, MeNuisance, ParametricNuisance};

/// Clipping thresholds applied before any division by an estimated quantity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClipPolicy {
    /// Probabilities are clamped to `[propensity, 1 - propensity]`.
    pub propensity: f64,
    /// Instrument strength denominators are pushed away from zero to this magnitude.
    pub denominator: f64,
}

impl Default for ClipPolicy {
    fn default() -> Self {
        ClipPolicy {
            propensity: 0.01,
            denominator: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ClipStats {
    pub propensity: usize,
    pub denominator: usize,
}

impl ClipStats {
    pub fn merge(&mut self, other: ClipStats) {
        self.propensity += other.propensity;
        self.denominator += other.denominator;
    }
}

fn clip_probability(p: f64, policy: &ClipPolicy, stats: &mut ClipStats) -> f64 {
    let lo = policy.propensity;
    let hi = 1.0 - policy.propensity;
    if p < lo {
        stats.propensity += 1;
        lo
    } else if p > hi {
        stats.propensity += 1;
        hi
    } else {
        p
    }
}

fn clip_denominator(v: f64, policy: &ClipPolicy, stats: &mut ClipStats) -> f64 {
    if v.abs() < policy.denominator {
        stats.denominator += 1;
        if v < 0.0 {
            -policy.denominator
        } else {
            policy.denominator
        }
    } else {
        v
    }
}

#[derive(Debug, Clone, Copy)]
pub struct MeObservation<'a> {
    pub outcome: f64,
    pub treatment: f64,
    pub source: f64,
    pub covariates: &'a [f64],
}

/// Augmented contrast of the arm-`arm` outcome regression between sources 1 and 0.
pub fn g_mean_exchangeability(
    obs: &MeObservation<'_>,
    nb: &MeNuisance,
    arm: u8,
    clip: &ClipPolicy,
    stats: &mut ClipStats,
) -> f64 {
    let x = obs.covariates;
    let on_arm = obs.treatment == f64::from(arm);
    let mean1 = (nb.outcome[1])(x);
    let mean0 = (nb.outcome[0])(x);
    let mut g = mean1 - mean0;
    if on_arm && obs.source == 1.0 {
        let p = clip_probability((nb.propensity[1])(x), clip, stats);
        g += (obs.outcome - mean1) / p;
    } else if on_arm && obs.source == 0.0 {
        let p = clip_probability((nb.propensity[0])(x), clip, stats);
        g -= (obs.outcome - mean0) / p;
    }
    g
}

pub fn plug_in_mean_exchangeability(obs: &MeObservation<'_>, nb: &MeNuisance) -> f64 {
    (nb.outcome[1])(obs.covariates) - (nb.outcome[0])(obs.covariates)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Instrument {
    First,
    Second,
}

impl Instrument {
    fn index(self) -> usize {
        match self {
            Instrument::First => 0,
            Instrument::Second => 1,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct IvObservation<'a> {
    pub outcome: f64,
    pub uptake: f64,
    pub instruments: [f64; 2],
    pub covariates: &'a [f64],
}

fn iv_component(obs: &IvObservation<'_>, arm: &IvArmNuisance, z: f64, clip: &ClipPolicy, stats: &mut ClipStats) -> f64 {
    let x = obs.covariates;
    let uptake1 = (arm.uptake[1])(x);
    let uptake0 = (arm.uptake[0])(x);
    let outcome1 = (arm.outcome[1])(x);
    let outcome0 = (arm.outcome[0])(x);
    let strength = clip_denominator(uptake1 - uptake0, clip, stats);
    let effect = outcome1 - outcome0;
    let (outcome_resid, uptake_resid) = if z == 1.0 {
        let p = clip_probability((arm.instrument)(x), clip, stats);
        ((obs.outcome - outcome1) / p, (obs.uptake - uptake1) / p)
    } else {
        let q = 1.0 - clip_probability((arm.instrument)(x), clip, stats);
        (-(obs.outcome - outcome0) / q, -(obs.uptake - uptake0) / q)
    };
    outcome_resid / strength - effect / (strength * strength) * uptake_resid + effect / strength
}

/// Orthogonalized conditional Wald ratio for one instrument.
pub fn g_iv_component(
    obs: &IvObservation<'_>,
    nb: &IvNuisance,
    instrument: Instrument,
    clip: &ClipPolicy,
    stats: &mut ClipStats,
) -> f64 {
    let j = instrument.index();
    iv_component(obs, &nb.arms[j], obs.instruments[j], clip, stats)
}

pub fn g_iv_compatibility(obs: &IvObservation<'_>, nb: &IvNuisance, clip: &ClipPolicy, stats: &mut ClipStats) -> f64 {
    g_iv_component(obs, nb, Instrument::First, clip, stats) - g_iv_component(obs, nb, Instrument::Second, clip, stats)
}

pub fn plug_in_iv_compatibility(
    obs: &IvObservation<'_>,
    nb: &IvNuisance,
    clip: &ClipPolicy,
    stats: &mut ClipStats,
) -> f64 {
    let x = obs.covariates;
    let ratio = |arm: &IvArmNuisance, stats: &mut ClipStats| {
        let strength = clip_denominator((arm.uptake[1])(x) - (arm.uptake[0])(x), clip, stats);
        ((arm.outcome[1])(x) - (arm.outcome[0])(x)) / strength
    };
    ratio(&nb.arms[0], stats) - ratio(&nb.arms[1], stats)
}

#[derive(Debug, Clone, Copy)]
pub struct RegressionObservation<'a> {
    pub outcome: f64,
    pub covariates: &'a [f64],
}

/// Regression residual minus its projection through the OLS influence function.
pub fn g_parametric_spec(obs: &RegressionObservation<'_>, nb: &ParametricNuisance) -> f64 {
    let f = nb.features.expand(obs.covariates);
    let residual = obs.outcome - dot(&f, &nb.coefficients);
    let mut adjustment = 0.0;
    for (i, fi) in f.iter().enumerate() {
        let row = nb.gram_inverse.row(i);
        adjustment += fi * dot(row, &f) * residual;
    }
    residual - adjustment
}

pub fn plug_in_parametric_spec(obs: &RegressionObservation<'_>, nb: &ParametricNuisance) -> f64 {
    let f = nb.features.expand(obs.covariates);
    obs.outcome - dot(&f, &nb.coefficients)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, Copy)]
pub struct CovObservation<'a> {
    pub outcome: f64,
    pub partner: f64,
    pub covariates: &'a [f64],
}

pub fn g_conditional_covariance(obs: &CovObservation<'_>, nb: &CovarianceNuisance) -> f64 {
    let x = obs.covariates;
    (obs.outcome - (nb.outcome_mean)(x)) * (obs.partner - (nb.partner_mean)(x))
}

pub fn plug_in_conditional_covariance(obs: &CovObservation<'_>, nb: &CovarianceNuisance) -> f64 {
    (obs.outcome - (nb.outcome_mean)(obs.covariates)) * obs.partner
}
