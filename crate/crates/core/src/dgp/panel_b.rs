use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use super::uniform_pm1;
use crate::dataset::{Column, ColumnKind, Dataset};
use crate::numerics::{expit, logit, RngStream};
use crate::scores::{nuisance_fn, IvArmNuisance, IvNuisance, NuisanceBundle, NuisanceFn, ScoreKind, ScoreSpec};

/// How the second parameter of the confounder's normal law is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UParam {
    #[default]
    Variance,
    StdDev,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PanelBConfig {
    pub n: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub seed: u64,
    pub u_param: UParam,
}

const U_MEAN: f64 = -0.3;
const U_PARAM: f64 = 0.3;

/// Compliance types by response to the two instruments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stratum {
    /// Never treated.
    Never,
    /// Follows the first instrument.
    FirstOnly,
    /// Follows the second instrument.
    SecondOnly,
    /// Treated only when both instruments encourage.
    Reluctant,
    /// Treated when either instrument encourages.
    Eager,
}

impl Stratum {
    pub const ALL: [Stratum; 5] = [
        Stratum::Never,
        Stratum::FirstOnly,
        Stratum::SecondOnly,
        Stratum::Reluctant,
        Stratum::Eager,
    ];

    pub fn uptake(self, z1: bool, z2: bool) -> bool {
        match self {
            Stratum::Never => false,
            Stratum::FirstOnly => z1,
            Stratum::SecondOnly => z2,
            Stratum::Reluctant => z1 && z2,
            Stratum::Eager => z1 || z2,
        }
    }
}

fn instrument_probs(x: &[f64]) -> [f64; 2] {
    [
        expit(0.5 + 0.5 * x[0] + 0.5 * x[1]),
        expit(0.5 + 0.5 * x[0] - 0.5 * x[1]),
    ]
}

fn stratum_logits(x: &[f64], u_positive: bool) -> [f64; 5] {
    let x1 = f64::from(u8::from(x[0] > 0.0));
    let x2 = f64::from(u8::from(x[1] > 0.0));
    let shift = if u_positive { 0.3 } else { 0.0 };
    let strict = 3.5 + 0.5 * x1 + x2 + shift;
    let mixed = 2.0 + x1 + x2 + shift;
    [1.0 - x2 + shift, strict, strict, mixed, mixed]
}

fn softmax(logits: [f64; 5]) -> [f64; 5] {
    let top = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w = logits.map(|l| libm::exp(l - top));
    let total: f64 = w.iter().sum();
    w.map(|v| v / total)
}

/// Stratum probabilities given covariates, in [`Stratum::ALL`] order. The
/// confounder shifts every logit equally and so drops out.
pub fn stratum_probabilities(x: &[f64]) -> [f64; 5] {
    softmax(stratum_logits(x, false))
}

fn violation(x: &[f64], beta1: f64, beta2: f64) -> f64 {
    beta1 * (libm::cos(PI * x[0]) + libm::cos(PI * x[1])) + beta2 * (x[0] + x[1])
}

fn treated_effect(x: &[f64], stratum: Stratum, beta1: f64, beta2: f64) -> f64 {
    match stratum {
        Stratum::Never => 0.0,
        Stratum::SecondOnly => -2.0 * x[0] + violation(x, beta1, beta2),
        _ => -2.0 * x[0],
    }
}

pub fn gen_panel_b(cfg: &PanelBConfig) -> Dataset {
    gen_panel_b_with_strata(cfg).0
}

/// Like [`gen_panel_b`], also returning each row's latent stratum.
pub fn gen_panel_b_with_strata(cfg: &PanelBConfig) -> (Dataset, Vec<Stratum>) {
    let mut rng = RngStream::new(cfg.seed);
    let n = cfg.n;
    let u_sd = match cfg.u_param {
        UParam::Variance => libm::sqrt(U_PARAM),
        UParam::StdDev => U_PARAM,
    };
    let mut cols: [Vec<f64>; 6] = core::array::from_fn(|_| Vec::with_capacity(n));
    let mut strata = Vec::with_capacity(n);
    for _ in 0..n {
        let x = [uniform_pm1(&mut rng), uniform_pm1(&mut rng)];
        let [q1, q2] = instrument_probs(&x);
        let z1 = rng.bernoulli(q1);
        let z2 = rng.bernoulli(q2);
        let u = U_MEAN + u_sd * rng.normal();
        let probs = softmax(stratum_logits(&x, u > 0.0));
        let draw = rng.uniform();
        let mut acc = 0.0;
        let mut stratum = Stratum::Eager;
        for (s, p) in Stratum::ALL.into_iter().zip(probs) {
            acc += p;
            if draw < acc {
                stratum = s;
                break;
            }
        }
        let d = stratum.uptake(z1, z2);
        let y0 = 1.0 + x[0] + x[1] + u + rng.normal();
        let y = if d {
            y0 + treated_effect(&x, stratum, cfg.beta1, cfg.beta2)
        } else {
            y0
        };
        let b = |v: bool| f64::from(u8::from(v));
        for (c, v) in cols.iter_mut().zip([x[0], x[1], b(z1), b(z2), b(d), y]) {
            c.push(v);
        }
        strata.push(stratum);
    }
    let [x1, x2, z1, z2, d, y] = cols;
    let data = Dataset::new(
        alloc::vec![
            Column::new("X1", ColumnKind::Continuous, x1),
            Column::new("X2", ColumnKind::Continuous, x2),
            Column::new("Z1", ColumnKind::Binary, z1),
            Column::new("Z2", ColumnKind::Binary, z2),
            Column::new("D", ColumnKind::Binary, d),
            Column::new("Y", ColumnKind::Continuous, y),
        ],
        format!(
            "panel_b(n={}, beta1={}, beta2={}, seed={}, u_param={:?})",
            cfg.n, cfg.beta1, cfg.beta2, cfg.seed, cfg.u_param
        ),
    )
    .expect("generated columns satisfy the schema");
    (data, strata)
}

/// `P(D = 1 | stratum, Z_j = z, x)` with the other instrument marginalized.
fn uptake_given(stratum: Stratum, first: bool, z: bool, other_prob: f64) -> f64 {
    let own = f64::from(u8::from(z));
    match (stratum, first) {
        (Stratum::Never, _) => 0.0,
        (Stratum::FirstOnly, true) | (Stratum::SecondOnly, false) => own,
        (Stratum::FirstOnly, false) | (Stratum::SecondOnly, true) => other_prob,
        (Stratum::Reluctant, _) => own * other_prob,
        (Stratum::Eager, _) => own + (1.0 - own) * other_prob,
    }
}

fn arm_means(x: &[f64], first: bool, z: bool, beta1: f64, beta2: f64) -> (f64, f64) {
    let q = instrument_probs(x);
    let other = if first { q[1] } else { q[0] };
    let p = stratum_probabilities(x);
    let mut uptake = 0.0;
    let mut gain = 0.0;
    for (s, ps) in Stratum::ALL.into_iter().zip(p) {
        let d = ps * uptake_given(s, first, z, other);
        uptake += d;
        gain += d * treated_effect(x, s, beta1, beta2);
    }
    (uptake, 1.0 + U_MEAN + x[0] + x[1] + gain)
}

fn oracle_arm(first: bool, beta1: f64, beta2: f64) -> IvArmNuisance {
    let j = usize::from(!first);
    let uptake = |z: bool| nuisance_fn(move |x| arm_means(x, first, z, beta1, beta2).0);
    let outcome = |z: bool| nuisance_fn(move |x| arm_means(x, first, z, beta1, beta2).1);
    IvArmNuisance {
        instrument: nuisance_fn(move |x| instrument_probs(x)[j]),
        uptake: [uptake(false), uptake(true)],
        outcome: [outcome(false), outcome(true)],
    }
}

/// True instrument propensities and arm-wise treatment and outcome means,
/// marginalized over strata, the other instrument and the confounder.
pub fn oracle_nuisances_panel_b(beta1: f64, beta2: f64) -> NuisanceBundle {
    NuisanceBundle::Iv(IvNuisance {
        arms: [oracle_arm(true, beta1, beta2), oracle_arm(false, beta1, beta2)],
    })
}

/// Truth with instrument logits raised by 0.3, encouraged-arm uptake raised
/// by 0.05, and the first instrument's encouraged-arm outcome raised by 0.3.
pub fn panel_b_perturbation(beta1: f64, beta2: f64) -> NuisanceBundle {
    let NuisanceBundle::Iv(truth) = oracle_nuisances_panel_b(beta1, beta2) else {
        unreachable!()
    };
    let shift = |f: &NuisanceFn, by: f64| {
        let f = f.clone();
        nuisance_fn(move |x| f(x) + by)
    };
    let arms = truth.arms.each_ref().map(|arm| {
        let p = arm.instrument.clone();
        IvArmNuisance {
            instrument: nuisance_fn(move |x| expit(logit(p(x)) + 0.3)),
            uptake: [arm.uptake[0].clone(), shift(&arm.uptake[1], 0.05)],
            outcome: arm.outcome.clone(),
        }
    });
    let [first, second] = arms;
    let first = IvArmNuisance {
        outcome: [first.outcome[0].clone(), shift(&first.outcome[1], 0.3)],
        ..first
    };
    NuisanceBundle::Iv(IvNuisance { arms: [first, second] })
}

pub fn panel_b_score() -> ScoreSpec {
    ScoreSpec::new(ScoreKind::IvCompatibility)
}
