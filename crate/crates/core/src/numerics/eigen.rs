use alloc::vec::Vec;

use super::{Matrix, SymMatrix};
use crate::{Error, Result};

const MAX_SWEEPS: usize = 100;
const OFF_DIAGONAL_TOL: f64 = 1e-12;
/// Relative tolerance below which negative eigenvalues count as rounding.
const PSD_TOL: f64 = 1e-10;

/// Spectral decomposition `A = V diag(λ) Vᵀ` with eigenvalues sorted in
/// descending order and eigenvectors stored as the columns of `V`.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Matrix,
}

impl EigenDecomposition {
    /// Rebuilds `V diag(λ) Vᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        let mut out = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = (0..n).map(|k| v[(i, k)] * self.eigenvalues[k] * v[(j, k)]).sum();
            }
        }
        out
    }
}

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    libm::sqrt(s)
}

/// Cyclic Jacobi eigen-decomposition of a symmetric matrix.
///
/// Sweeps over all `(p, q)` pairs until the off-diagonal Frobenius norm falls
/// below `1e-12 · ‖A‖_F`, with a budget of 100 sweeps.
pub fn sym_eigen(a: &SymMatrix) -> Result<EigenDecomposition> {
    let n = a.dim();
    let mut m = a.as_matrix().clone();
    if !m.is_finite() {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let mut v = Matrix::identity(n);
    let scale = m.frobenius();
    let threshold = OFF_DIAGONAL_TOL * scale;

    let mut converged = scale == 0.0;
    for _ in 0..MAX_SWEEPS {
        if converged || off_diagonal_norm(&m) <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + libm::sqrt(1.0 + theta * theta))
                } else {
                    -1.0 / (-theta + libm::sqrt(1.0 + theta * theta))
                };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = t * c;
                // A <- A J
                for k in 0..n {
                    let akp = m[(k, p)];
                    let akq = m[(k, q)];
                    m[(k, p)] = c * akp - s * akq;
                    m[(k, q)] = s * akp + c * akq;
                }
                // A <- Jᵀ A
                for k in 0..n {
                    let apk = m[(p, k)];
                    let aqk = m[(q, k)];
                    m[(p, k)] = c * apk - s * aqk;
                    m[(q, k)] = s * apk + c * aqk;
                }
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged && off_diagonal_norm(&m) > threshold {
        return Err(Error::NumericalFailure(alloc::format!(
            "Jacobi iteration did not converge in {MAX_SWEEPS} sweeps"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].total_cmp(&m[(i, i)]));
    let eigenvalues = order.iter().map(|&i| m[(i, i)]).collect();
    let mut eigenvectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for k in 0..n {
            eigenvectors[(k, dst)] = v[(k, src)];
        }
    }
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Square root `M = Λ^{1/2} Γ` of a PSD matrix `A = Γᵀ Λ Γ`: row `i` of `M` is
/// eigenvector `i` scaled by `√λ_i`, so that `MᵀM = A`.
///
/// Eigenvalues in `[-1e-10·‖A‖, 0)` are treated as rounding and clipped to 0.
pub fn psd_sqrt(a: &SymMatrix) -> Result<Matrix> {
    let eig = sym_eigen(a)?;
    let n = a.dim();
    let spectral = eig.eigenvalues.iter().fold(0.0_f64, |acc, l| acc.max(l.abs()));
    let min = eig.eigenvalues.last().copied().unwrap_or(0.0);
    if min < -PSD_TOL * spectral {
        return Err(Error::NotPsd { min_eigenvalue: min });
    }
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        let root = libm::sqrt(eig.eigenvalues[i].max(0.0));
        for k in 0..n {
            m[(i, k)] = root * eig.eigenvectors[(k, i)];
        }
    }
    Ok(m)
}

/// Trace and Frobenius norm of a symmetric matrix.
pub fn frob_and_trace(a: &SymMatrix) -> Result<(f64, f64)> {
    let m = a.as_matrix();
    if !m.is_finite() {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let trace = (0..a.dim()).map(|i| m[(i, i)]).sum();
    Ok((trace, m.frobenius()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::RngStream;
    use proptest::prelude::*;

    fn random_symmetric(n: usize, rng: &mut RngStream) -> SymMatrix {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = rng.normal();
            }
        }
        SymMatrix::new(m).unwrap()
    }

    fn orthogonality_error(v: &Matrix) -> f64 {
        v.transpose()
            .matmul(v)
            .unwrap()
            .sub(&Matrix::identity(v.rows()))
            .unwrap()
            .frobenius()
    }

    #[test]
    fn diagonal_sorted_descending() {
        let e = sym_eigen(&SymMatrix::from_rows(&[[2.0, 0.0], [0.0, 3.0]]).unwrap()).unwrap();
        assert_eq!(e.eigenvalues, vec![3.0, 2.0]);
    }

    #[test]
    fn exchange_matrix() {
        // λ² - 1 = 0
        let e = sym_eigen(&SymMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap()).unwrap();
        assert!((e.eigenvalues[0] - 1.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] + 1.0).abs() < 1e-14);
        let r = core::f64::consts::FRAC_1_SQRT_2;
        let v = &e.eigenvectors;
        // up to sign
        assert!((v[(0, 0)].abs() - r).abs() < 1e-14 && (v[(0, 0)] - v[(1, 0)]).abs() < 1e-14);
        assert!((v[(0, 1)].abs() - r).abs() < 1e-14 && (v[(0, 1)] + v[(1, 1)]).abs() < 1e-14);
    }

    #[test]
    fn identity_eigenvalues() {
        let e = sym_eigen(&SymMatrix::identity(6)).unwrap();
        assert!(e.eigenvalues.iter().all(|&l| l == 1.0));
    }

    #[test]
    fn zero_matrix() {
        let e = sym_eigen(&SymMatrix::new(Matrix::zeros(3, 3)).unwrap()).unwrap();
        assert!(e.eigenvalues.iter().all(|&l| l == 0.0));
    }

    #[test]
    fn non_finite_rejected() {
        let s = SymMatrix::from_rows(&[[f64::NAN, 0.0], [0.0, 1.0]]).unwrap();
        assert!(matches!(sym_eigen(&s), Err(Error::InvalidInput(_))));
        assert!(matches!(frob_and_trace(&s), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn psd_sqrt_identity_and_diagonal() {
        let m = psd_sqrt(&SymMatrix::identity(3)).unwrap();
        let mtm = m.transpose().matmul(&m).unwrap();
        assert!(mtm.sub(&Matrix::identity(3)).unwrap().frobenius() < 1e-14);

        let m = psd_sqrt(&SymMatrix::from_rows(&[[4.0, 0.0], [0.0, 9.0]]).unwrap()).unwrap();
        // rows are scaled eigenvectors: singular values are the row norms
        let mut norms: Vec<f64> = (0..2)
            .map(|i| libm::sqrt(m.row(i).iter().map(|v| v * v).sum()))
            .collect();
        norms.sort_by(|a, b| b.total_cmp(a));
        assert!((norms[0] - 3.0).abs() < 1e-14 && (norms[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn psd_sqrt_two_by_two() {
        // eigenpairs (3, (1,1)/√2) and (1, (1,-1)/√2)
        let a = SymMatrix::from_rows(&[[2.0, 1.0], [1.0, 2.0]]).unwrap();
        let m = psd_sqrt(&a).unwrap();
        let r = core::f64::consts::FRAC_1_SQRT_2;
        let s3 = libm::sqrt(3.0);
        assert!((m[(0, 0)].abs() - s3 * r).abs() < 1e-12);
        assert!((m[(1, 0)].abs() - r).abs() < 1e-12);
        let mtm = m.transpose().matmul(&m).unwrap();
        assert!(mtm.sub(a.as_matrix()).unwrap().frobenius() < 1e-12);
    }

    #[test]
    fn psd_sqrt_rejects_indefinite_and_clips_rounding() {
        let a = SymMatrix::from_rows(&[[1.0, 0.0], [0.0, -0.5]]).unwrap();
        assert!(matches!(psd_sqrt(&a), Err(Error::NotPsd { .. })));
        let a = SymMatrix::from_rows(&[[1.0, 0.0], [0.0, -1e-13]]).unwrap();
        let m = psd_sqrt(&a).unwrap();
        assert_eq!(m.row(1), &[0.0, 0.0]);
    }

    #[test]
    fn frob_and_trace_examples() {
        assert_eq!(frob_and_trace(&SymMatrix::identity(5)).unwrap(), (5.0, libm::sqrt(5.0)));
        let (t, f) = frob_and_trace(&SymMatrix::from_rows(&[[2.0, 1.0], [1.0, 2.0]]).unwrap()).unwrap();
        assert_eq!(t, 4.0);
        assert!((f - libm::sqrt(10.0)).abs() < 1e-15);
        assert_eq!(
            frob_and_trace(&SymMatrix::new(Matrix::zeros(4, 4)).unwrap()).unwrap(),
            (0.0, 0.0)
        );
    }

    #[test]
    fn reconstruction_on_random_matrices() {
        let mut rng = RngStream::new(7);
        for n in 1..=50 {
            let a = random_symmetric(n, &mut rng);
            let e = sym_eigen(&a).unwrap();
            let scale = a.as_matrix().frobenius().max(1.0);
            let err = e.reconstruct().sub(a.as_matrix()).unwrap().frobenius();
            assert!(err <= 1e-10 * scale, "n={n} err={err}");
            assert!(orthogonality_error(&e.eigenvectors) <= 1e-10);
            assert!(e.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    proptest! {
        #[test]
        fn trace_and_frobenius_match_spectrum(seed in any::<u64>(), n in 1usize..20) {
            let mut rng = RngStream::new(seed);
            let a = random_symmetric(n, &mut rng);
            let e = sym_eigen(&a).unwrap();
            let (t, f) = frob_and_trace(&a).unwrap();
            let sum: f64 = e.eigenvalues.iter().sum();
            let sum_sq: f64 = e.eigenvalues.iter().map(|l| l * l).sum();
            prop_assert!((t - sum).abs() <= 1e-9 * f.max(1.0));
            prop_assert!((f * f - sum_sq).abs() <= 1e-9 * (f * f).max(1.0));
        }

        #[test]
        fn psd_sqrt_round_trips_gram_matrices(seed in any::<u64>(), n in 1usize..15, k in 1usize..20) {
            let mut rng = RngStream::new(seed);
            let mut g = Matrix::zeros(k, n);
            for i in 0..k {
                for j in 0..n {
                    g[(i, j)] = rng.normal();
                }
            }
            let a = SymMatrix::new(g.transpose().matmul(&g).unwrap()).unwrap();
            let m = psd_sqrt(&a).unwrap();
            let back = m.transpose().matmul(&m).unwrap();
            let err = back.sub(a.as_matrix()).unwrap().frobenius();
            prop_assert!(err <= 1e-9 * a.as_matrix().frobenius().max(1.0));
        }
    }
}
