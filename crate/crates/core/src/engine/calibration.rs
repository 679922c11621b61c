use super::Warning;
use crate::numerics::RngStream;
use crate::{Error, Result};

/// Monte Carlo upper-tail probability of `Σ τ_j χ²_j(1)` at `s`.
///
/// Negative weights (eigenvalue rounding) are treated as zero. Returns the
/// proportion of `draws` mixture samples that are `>= s`.
pub fn weighted_chisq_pvalue(
    taus: &[f64],
    s: f64,
    draws: usize,
    rng: &mut RngStream,
) -> Result<(f64, Option<Warning>)> {
    if draws == 0 {
        return Err(Error::InvalidInput("at least one Monte Carlo draw is required".into()));
    }
    if !s.is_finite() || taus.iter().any(|t| !t.is_finite()) {
        return Err(Error::NumericalFailure("non-finite calibration input".into()));
    }
    if s <= 0.0 {
        return Ok((1.0, None));
    }
    let weights: alloc::vec::Vec<f64> = taus.iter().map(|t| t.max(0.0)).filter(|&t| t > 0.0).collect();
    if weights.is_empty() {
        return Ok((0.0, Some(Warning::DegenerateNull)));
    }
    let mut exceed = 0usize;
    for _ in 0..draws {
        let mut total = 0.0;
        for &w in &weights {
            total += w * rng.chisq1();
        }
        if total >= s {
            exceed += 1;
        }
    }
    Ok((exceed as f64 / draws as f64, None))
}
