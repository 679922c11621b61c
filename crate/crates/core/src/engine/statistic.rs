use alloc::vec;
use alloc::vec::Vec;

use crate::basis::DesignMatrix;
use crate::numerics::{psd_sqrt, Matrix, SymMatrix};
use crate::{Error, Result};

/// `a = (1/n) Σ B(X_i) g_i`.
pub fn projection_vector(design: &DesignMatrix, g: &[f64]) -> Result<Vec<f64>> {
    let b = design.values();
    if b.rows() != g.len() {
        return Err(Error::InvalidInput(alloc::format!(
            "design has {} rows but {} scores were given",
            b.rows(),
            g.len()
        )));
    }
    if g.is_empty() {
        return Err(Error::InvalidInput("no observations".into()));
    }
    let mut a = vec![0.0; b.cols()];
    for (i, gi) in g.iter().enumerate() {
        for (aj, bij) in a.iter_mut().zip(b.row(i)) {
            *aj += bij * gi;
        }
    }
    let n = g.len() as f64;
    a.iter_mut().for_each(|v| *v /= n);
    Ok(a)
}

fn check_psd(omega: &SymMatrix) -> Result<Matrix> {
    psd_sqrt(omega)
}

/// `n · aᵀ Ω a`.
pub fn statistic(a: &[f64], omega: &SymMatrix, n: usize) -> Result<f64> {
    if a.len() != omega.dim() {
        return Err(Error::InvalidInput("projection and weighting dimensions differ".into()));
    }
    let root = check_psd(omega)?;
    let ra = root.matvec(a)?;
    Ok(n as f64 * ra.iter().map(|v| v * v).sum::<f64>())
}

/// `Σ̂ = (1/n) Σ g_i² (Ω^{1/2} B_i)(Ω^{1/2} B_i)ᵀ`.
pub fn sigma_hat(design: &DesignMatrix, g: &[f64], omega: &SymMatrix) -> Result<SymMatrix> {
    let b = design.values();
    if b.rows() != g.len() || g.is_empty() {
        return Err(Error::InvalidInput("design and score lengths differ".into()));
    }
    let j = b.cols();
    if omega.dim() != j {
        return Err(Error::InvalidInput("weighting and basis dimensions differ".into()));
    }
    let root = check_psd(omega)?;
    let mut sigma = Matrix::zeros(j, j);
    let mut v = vec![0.0; j];
    for (i, gi) in g.iter().enumerate() {
        let row = b.row(i);
        for (r, vr) in v.iter_mut().enumerate() {
            *vr = root.row(r).iter().zip(row).map(|(x, y)| x * y).sum();
        }
        let w = gi * gi;
        for r in 0..j {
            let wr = w * v[r];
            for c in r..j {
                sigma[(r, c)] += wr * v[c];
            }
        }
    }
    let n = g.len() as f64;
    for r in 0..j {
        for c in r..j {
            let val = sigma[(r, c)] / n;
            sigma[(r, c)] = val;
            sigma[(c, r)] = val;
        }
    }
    SymMatrix::new(sigma)
}
