use alloc::vec;
use alloc::vec::Vec;

use super::Matrix;
use crate::{Error, Result};

/// Column dependence below this (relative to the largest column norm) is exact
/// rank deficiency.
const RANK_TOL: f64 = 1e-12;
/// Between `RANK_TOL` and this, the system is solved with a ridge jitter.
const JITTER_TRIGGER: f64 = 1e-8;
const JITTER: f64 = 1e-10;

/// Weighted least squares `argmin Σ wᵢ (yᵢ − xᵢᵀβ)²` via Householder QR.
///
/// Nearly collinear designs fall back to ridge-jittered normal equations;
/// numerically dependent columns return [`Error::SingularDesign`].
pub fn least_squares(x: &Matrix, y: &[f64], weights: Option<&[f64]>) -> Result<Vec<f64>> {
    let n = x.rows();
    let p = x.cols();
    if y.len() != n || weights.is_some_and(|w| w.len() != n) {
        return Err(Error::InvalidInput("least squares length mismatch".into()));
    }
    if n < p || p == 0 {
        return Err(Error::InvalidInput(alloc::format!(
            "least squares needs at least as many rows as columns ({n} < {p})"
        )));
    }

    // Column-major working copy of √w·X and √w·y.
    let mut a = vec![0.0; n * p];
    let mut b = vec![0.0; n];
    for i in 0..n {
        let sw = weights.map_or(1.0, |w| libm::sqrt(w[i]));
        for j in 0..p {
            a[j * n + i] = sw * x[(i, j)];
        }
        b[i] = sw * y[i];
    }
    if a.iter().chain(&b).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite values in least squares".into()));
    }
    let col_scale = (0..p)
        .map(|j| libm::sqrt(a[j * n..(j + 1) * n].iter().map(|v| v * v).sum()))
        .fold(0.0_f64, f64::max);
    if col_scale == 0.0 {
        return Err(Error::SingularDesign);
    }

    let mut diag = vec![0.0; p];
    for k in 0..p {
        let col = &mut a[k * n..(k + 1) * n];
        let norm = libm::sqrt(col[k..].iter().map(|v| v * v).sum());
        if norm == 0.0 {
            diag[k] = 0.0;
            continue;
        }
        let alpha = if col[k] > 0.0 { -norm } else { norm };
        // v = col[k..] - alpha e_k, stored in place
        col[k] -= alpha;
        let vnorm2: f64 = col[k..].iter().map(|v| v * v).sum();
        diag[k] = alpha;
        let v: Vec<f64> = col[k..].to_vec();
        for j in (k + 1)..p {
            let cj = &mut a[j * n..(j + 1) * n];
            let dot: f64 = v.iter().zip(&cj[k..]).map(|(a, b)| a * b).sum();
            let f = 2.0 * dot / vnorm2;
            for (c, vi) in cj[k..].iter_mut().zip(&v) {
                *c -= f * vi;
            }
        }
        let dot: f64 = v.iter().zip(&b[k..]).map(|(a, b)| a * b).sum();
        let f = 2.0 * dot / vnorm2;
        for (c, vi) in b[k..].iter_mut().zip(&v) {
            *c -= f * vi;
        }
    }

    let min_diag = diag.iter().fold(f64::INFINITY, |m, d| m.min(d.abs()));
    if min_diag <= RANK_TOL * col_scale {
        return Err(Error::SingularDesign);
    }
    if min_diag <= JITTER_TRIGGER * col_scale {
        return ridge_normal_equations(x, y, weights);
    }

    // Back substitution on R (strict upper part lives in column-major `a`).
    let mut beta = vec![0.0; p];
    for k in (0..p).rev() {
        let mut s = b[k];
        for j in (k + 1)..p {
            s -= a[j * n + k] * beta[j];
        }
        beta[k] = s / diag[k];
    }
    Ok(beta)
}

fn ridge_normal_equations(x: &Matrix, y: &[f64], weights: Option<&[f64]>) -> Result<Vec<f64>> {
    let p = x.cols();
    let mut gram = Matrix::zeros(p, p);
    let mut rhs = vec![0.0; p];
    for i in 0..x.rows() {
        let w = weights.map_or(1.0, |w| w[i]);
        let r = x.row(i);
        for j in 0..p {
            rhs[j] += w * r[j] * y[i];
            for k in 0..p {
                gram[(j, k)] += w * r[j] * r[k];
            }
        }
    }
    solve_spd(&gram, &rhs)
}

fn cholesky(a: &Matrix) -> Option<Matrix> {
    let n = a.rows();
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > 0.0) {
            return None;
        }
        let d = libm::sqrt(d);
        l[(j, j)] = d;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Some(l)
}

/// Solves `A x = b` for symmetric positive definite `A` by Cholesky. If the
/// factorization fails, retries once with `1e-10 · max diag(A)` added to the
/// diagonal.
pub fn solve_spd(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.rows();
    if a.cols() != n || b.len() != n {
        return Err(Error::InvalidInput("solve_spd shape mismatch".into()));
    }
    let l = match cholesky(a) {
        Some(l) => l,
        None => {
            let scale = (0..n).map(|i| a[(i, i)].abs()).fold(0.0_f64, f64::max);
            if scale == 0.0 || !scale.is_finite() {
                return Err(Error::SingularDesign);
            }
            let mut jittered = a.clone();
            for i in 0..n {
                jittered[(i, i)] += JITTER * scale;
            }
            cholesky(&jittered).ok_or(Error::SingularDesign)?
        }
    };
    let mut z = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[(i, k)] * z[k];
        }
        z[i] = s / l[(i, i)];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = z[i];
        for k in (i + 1)..n {
            s -= l[(k, i)] * x[k];
        }
        x[i] = s / l[(i, i)];
    }
    Ok(x)
}

/// Inverse of a symmetric positive definite matrix, column by column via [`solve_spd`].
pub fn spd_inverse(a: &Matrix) -> Result<Matrix> {
    let n = a.rows();
    let mut inv = Matrix::zeros(n, n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[j] = 1.0;
        for (i, v) in solve_spd(a, &e)?.into_iter().enumerate() {
            inv[(i, j)] = v;
        }
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spd_inverse_round_trip() {
        let a = Matrix::from_rows(&[[4.0, 1.0, 0.5], [1.0, 3.0, 0.2], [0.5, 0.2, 2.0]]).unwrap();
        let prod = a.matmul(&spd_inverse(&a).unwrap()).unwrap();
        assert!(prod.sub(&Matrix::identity(3)).unwrap().frobenius() < 1e-12);
    }

    #[test]
    fn exact_fit() {
        let x = Matrix::from_rows(&[[1.0, 0.0], [1.0, 1.0], [1.0, 2.0], [1.0, 3.0]]).unwrap();
        let beta = least_squares(&x, &[1.0, 3.0, 5.0, 7.0], None).unwrap();
        assert!((beta[0] - 1.0).abs() < 1e-12 && (beta[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn weighted_matches_row_duplication() {
        let x = Matrix::from_rows(&[[1.0, 0.0], [1.0, 1.0], [1.0, 2.0]]).unwrap();
        let y = [0.0, 2.0, 1.0];
        let w = least_squares(&x, &y, Some(&[2.0, 1.0, 1.0])).unwrap();
        let xd = Matrix::from_rows(&[[1.0, 0.0], [1.0, 0.0], [1.0, 1.0], [1.0, 2.0]]).unwrap();
        let d = least_squares(&xd, &[0.0, 0.0, 2.0, 1.0], None).unwrap();
        assert!((w[0] - d[0]).abs() < 1e-12 && (w[1] - d[1]).abs() < 1e-12);
    }

    #[test]
    fn duplicate_column_is_singular() {
        let x = Matrix::from_rows(&[[1.0, 2.0, 2.0], [1.0, 3.0, 3.0], [1.0, 5.0, 5.0], [1.0, 1.0, 1.0]]).unwrap();
        assert_eq!(
            least_squares(&x, &[1.0, 2.0, 3.0, 4.0], None),
            Err(Error::SingularDesign)
        );
    }

    #[test]
    fn nearly_collinear_is_rescued() {
        let x = Matrix::from_rows(&[
            [1.0, 1.0, 1.0 + 1e-10],
            [1.0, 2.0, 2.0],
            [1.0, 3.0, 3.0 - 1e-10],
            [1.0, 4.0, 4.0],
        ])
        .unwrap();
        let beta = least_squares(&x, &[1.0, 2.0, 3.0, 4.0], None).unwrap();
        assert!(beta.iter().all(|b| b.is_finite()));
    }

    #[test]
    fn spd_solve() {
        let a = Matrix::from_rows(&[[4.0, 1.0], [1.0, 3.0]]).unwrap();
        let x = solve_spd(&a, &[1.0, 2.0]).unwrap();
        assert!((4.0 * x[0] + x[1] - 1.0).abs() < 1e-14);
        assert!((x[0] + 3.0 * x[1] - 2.0).abs() < 1e-14);
        assert_eq!(solve_spd(&Matrix::zeros(2, 2), &[1.0, 1.0]), Err(Error::SingularDesign));
    }
}
