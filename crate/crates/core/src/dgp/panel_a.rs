use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use super::uniform_pm1;
use crate::dataset::{Column, ColumnKind, Dataset};
use crate::numerics::{expit, logit, RngStream};
use crate::scores::{nuisance_fn, MeNuisance, NuisanceBundle, ScoreKind, ScoreSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PanelAConfig {
    pub n: usize,
    pub alpha1: f64,
    pub alpha2: f64,
    pub seed: u64,
}

fn source_prob(x: &[f64]) -> f64 {
    expit(x[0] - x[1])
}

fn treat_prob(x: &[f64], s: f64) -> f64 {
    if s == 1.0 {
        expit(1.5 * x[0] - 0.5 * x[1])
    } else {
        expit(x[0] + 0.5 * x[1])
    }
}

fn control_mean(x: &[f64], s: f64, alpha1: f64, alpha2: f64) -> f64 {
    let base = x[0] + x[1] + expit(x[0]);
    if s == 1.0 {
        base + alpha1 * (libm::cos(PI * x[0]) + libm::cos(PI * x[1])) + alpha2 * (x[0] + x[1])
    } else {
        base
    }
}

fn effect(x: &[f64]) -> f64 {
    2.0 * x[0] - 2.0 * x[1]
}

/// Two covariates, source `S`, treatment `A` and outcome `Y`; the control
/// outcome mean differs between sources by the `alpha` terms.
pub fn gen_panel_a(cfg: &PanelAConfig) -> Dataset {
    let mut rng = RngStream::new(cfg.seed);
    let n = cfg.n;
    let mut cols: [Vec<f64>; 5] = core::array::from_fn(|_| Vec::with_capacity(n));
    for _ in 0..n {
        let x = [uniform_pm1(&mut rng), uniform_pm1(&mut rng)];
        let s = f64::from(u8::from(rng.bernoulli(source_prob(&x))));
        let a = f64::from(u8::from(rng.bernoulli(treat_prob(&x, s))));
        let y0 = control_mean(&x, s, cfg.alpha1, cfg.alpha2) + 0.5 * rng.normal();
        let y = if a == 1.0 { y0 + effect(&x) } else { y0 };
        for (c, v) in cols.iter_mut().zip([x[0], x[1], s, a, y]) {
            c.push(v);
        }
    }
    let [x1, x2, s, a, y] = cols;
    Dataset::new(
        alloc::vec![
            Column::new("X1", ColumnKind::Continuous, x1),
            Column::new("X2", ColumnKind::Continuous, x2),
            Column::new("S", ColumnKind::Binary, s),
            Column::new("A", ColumnKind::Binary, a),
            Column::new("Y", ColumnKind::Continuous, y),
        ],
        format!(
            "panel_a(n={}, alpha1={}, alpha2={}, seed={})",
            cfg.n, cfg.alpha1, cfg.alpha2, cfg.seed
        ),
    )
    .expect("generated columns satisfy the schema")
}

/// True `P(A = arm, S = s | x)` and `E[Y | A = arm, S = s, x]`.
pub fn oracle_nuisances_panel_a(alpha1: f64, alpha2: f64, arm: u8) -> NuisanceBundle {
    let on = arm == 1;
    let prop = move |s: f64| {
        nuisance_fn(move |x| {
            let ps = if s == 1.0 { source_prob(x) } else { 1.0 - source_prob(x) };
            let pa = treat_prob(x, s);
            ps * if on { pa } else { 1.0 - pa }
        })
    };
    let mean =
        move |s: f64| nuisance_fn(move |x| control_mean(x, s, alpha1, alpha2) + if on { effect(x) } else { 0.0 });
    NuisanceBundle::MeanExchangeability(MeNuisance {
        propensity: [prop(0.0), prop(1.0)],
        outcome: [mean(0.0), mean(1.0)],
    })
}

/// Truth with both propensity logits raised by 0.3 and the source-1 outcome
/// regression raised by 0.3.
pub fn panel_a_perturbation(alpha1: f64, alpha2: f64, arm: u8) -> NuisanceBundle {
    let NuisanceBundle::MeanExchangeability(truth) = oracle_nuisances_panel_a(alpha1, alpha2, arm) else {
        unreachable!()
    };
    let shift_logit = |f: crate::scores::NuisanceFn| nuisance_fn(move |x| expit(logit(f(x)) + 0.3));
    let [p0, p1] = truth.propensity;
    let [m0, m1] = truth.outcome;
    NuisanceBundle::MeanExchangeability(MeNuisance {
        propensity: [shift_logit(p0), shift_logit(p1)],
        outcome: [m0, nuisance_fn(move |x| m1(x) + 0.3)],
    })
}

pub fn panel_a_score(arm: u8) -> ScoreSpec {
    ScoreSpec::new(ScoreKind::MeanExchangeability { arm })
}
