use alloc::vec::Vec;

use super::bundle::NuisanceBundle;
use super::evaluate::BoundScore;
use super::functions::ClipStats;
use super::ScoreSpec;
use crate::basis::legendre_orthonormal;
use crate::dataset::Dataset;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreForm {
    Orthogonal,
    /// The uncorrected score the orthogonal form was derived from.
    PlugIn,
}

/// Bounded weight averaged against the score along the path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagnosticWeight {
    One,
    /// Degree-one orthonormal Legendre polynomial of the first covariate,
    /// after rescaling its sample range to `[-1, 1]`.
    FirstBasis,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalityPath {
    pub t_grid: Vec<f64>,
    pub weights: Vec<DiagnosticWeight>,
    /// `values[w][k]` is the weighted mean at `t_grid[k]`.
    pub values: Vec<Vec<f64>>,
    pub clip: ClipStats,
}

impl OrthogonalityPath {
    pub fn at(&self, weight: usize, t: f64) -> Option<f64> {
        let k = self.t_grid.iter().position(|&s| s == t)?;
        self.values.get(weight).map(|v| v[k])
    }

    /// Symmetric difference quotient `(D(h) - D(-h)) / 2h`.
    pub fn derivative_at_zero(&self, weight: usize, h: f64) -> Option<f64> {
        Some((self.at(weight, h)? - self.at(weight, -h)?) / (2.0 * h))
    }

    /// Second difference `D(h) + D(-h) - 2 D(0)`.
    pub fn curvature(&self, weight: usize, h: f64) -> Option<f64> {
        Some(self.at(weight, h)? + self.at(weight, -h)? - 2.0 * self.at(weight, 0.0)?)
    }
}

/// Weighted sample means of the score along `(1 - t)·truth + t·perturbation`.
pub fn orthogonality_diagnostic(
    spec: &ScoreSpec,
    form: ScoreForm,
    truth: &NuisanceBundle,
    perturbation: &NuisanceBundle,
    sample: &Dataset,
    t_grid: &[f64],
) -> Result<OrthogonalityPath> {
    if t_grid.is_empty() {
        return Err(Error::InvalidInput("empty t grid".into()));
    }
    let bound = BoundScore::bind(sample, spec)?;
    let n = sample.n();
    let first = bound.covariates.column(0);
    let (lo, hi) = first
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let span = if hi > lo { hi - lo } else { 1.0 };
    let basis_weight = first
        .iter()
        .map(|&v| legendre_orthonormal(1, ((2.0 * v - lo - hi) / span).clamp(-1.0, 1.0)))
        .collect::<Result<Vec<_>>>()?;
    let weights = alloc::vec![DiagnosticWeight::One, DiagnosticWeight::FirstBasis];
    let mut values = alloc::vec![Vec::with_capacity(t_grid.len()); weights.len()];
    let mut clip = ClipStats::default();
    for &t in t_grid {
        let bundle = truth.mix(perturbation, t)?;
        let mut sums = [0.0; 2];
        for i in 0..n {
            let g = bound.value(i, &bundle, form, &mut clip)?;
            sums[0] += g;
            sums[1] += g * basis_weight[i];
        }
        values[0].push(sums[0] / n as f64);
        values[1].push(sums[1] / n as f64);
    }
    Ok(OrthogonalityPath {
        t_grid: t_grid.to_vec(),
        weights,
        values,
        clip,
    })
}
