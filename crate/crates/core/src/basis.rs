//! Series bases on a box of covariates and their evaluation over a sample.
//!
//! Each covariate is mapped affinely from its declared range `[lo, hi]` onto
//! `[-1, 1]`, where the univariate families are orthonormal under the uniform
//! measure: `(1/2)∫ b_j b_k = δ_jk`.

use alloc::vec;
use alloc::vec::Vec;

use crate::numerics::Matrix;
use crate::{Error, Result};

/// Highest Legendre degree the recurrence is trusted for.
pub const MAX_LEGENDRE_DEGREE: usize = 64;
const RANGE_SLACK: f64 = 1e-9;
const GRID_POINTS: usize = 1001;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisFamily {
    LegendreOrthonormal,
    Fourier,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Combination {
    /// One shared constant followed by the non-constant functions of each
    /// covariate: `1 + d·(J* − 1)` columns.
    Additive,
    /// All products `Π_k b_{j_k}(x_k)` with `j_k < J*`, lexicographic in
    /// `(j_1, …, j_d)`: `(J*)^d` columns.
    TensorProduct,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasisSpec {
    pub family: BasisFamily,
    pub per_covariate: usize,
    pub combination: Combination,
    pub ranges: Vec<(f64, f64)>,
}

impl BasisSpec {
    pub fn new(
        family: BasisFamily,
        per_covariate: usize,
        combination: Combination,
        ranges: Vec<(f64, f64)>,
    ) -> Result<Self> {
        if per_covariate == 0 {
            return Err(Error::InvalidInput("J* must be at least 1".into()));
        }
        if family == BasisFamily::LegendreOrthonormal && per_covariate > MAX_LEGENDRE_DEGREE + 1 {
            return Err(Error::InvalidInput(alloc::format!(
                "Legendre J* is limited to {}",
                MAX_LEGENDRE_DEGREE + 1
            )));
        }
        if ranges.is_empty() {
            return Err(Error::InvalidInput("basis needs at least one covariate".into()));
        }
        for (k, &(lo, hi)) in ranges.iter().enumerate() {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidInput(alloc::format!(
                    "covariate {k} has invalid range ({lo}, {hi})"
                )));
            }
        }
        Ok(BasisSpec {
            family,
            per_covariate,
            combination,
            ranges,
        })
    }

    /// Legendre basis on `[-1, 1]^d`, additive combination.
    pub fn legendre(per_covariate: usize, dims: usize) -> Result<Self> {
        Self::new(
            BasisFamily::LegendreOrthonormal,
            per_covariate,
            Combination::Additive,
            vec![(-1.0, 1.0); dims],
        )
    }

    pub fn dims(&self) -> usize {
        self.ranges.len()
    }

    /// Total number of basis functions `J_n`.
    pub fn num_functions(&self) -> usize {
        let d = self.dims();
        match self.combination {
            Combination::Additive => 1 + d * (self.per_covariate - 1),
            Combination::TensorProduct => self.per_covariate.pow(d as u32),
        }
    }

    /// Maps `x` from covariate `k`'s range onto `[-1, 1]`.
    ///
    /// Written as `(2x − (lo + hi)) / (hi − lo)` so that the range `(-1, 1)`
    /// is the exact identity.
    #[inline]
    pub fn rescale(&self, k: usize, x: f64) -> f64 {
        let (lo, hi) = self.ranges[k];
        (2.0 * x - (lo + hi)) / (hi - lo)
    }

    /// Evaluates `B_n(x)` at a single point.
    pub fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.num_functions()];
        let mut scratch = vec![0.0; self.dims() * self.per_covariate];
        self.evaluate_into(x, 0, &mut scratch, &mut out)?;
        Ok(out)
    }

    fn evaluate_into(&self, x: &[f64], row: usize, scratch: &mut [f64], out: &mut [f64]) -> Result<()> {
        let d = self.dims();
        let jstar = self.per_covariate;
        if x.len() != d {
            return Err(Error::InvalidInput(alloc::format!(
                "point has {} coordinates, basis expects {d}",
                x.len()
            )));
        }
        for k in 0..d {
            let mut t = self.rescale(k, x[k]);
            if !t.is_finite() || t.abs() > 1.0 + RANGE_SLACK {
                return Err(Error::OutOfRange {
                    row,
                    column: k,
                    value: x[k],
                });
            }
            t = t.clamp(-1.0, 1.0);
            univariate_values(self.family, t, &mut scratch[k * jstar..(k + 1) * jstar]);
        }
        match self.combination {
            Combination::Additive => {
                out[0] = 1.0;
                let mut c = 1;
                for k in 0..d {
                    for j in 1..jstar {
                        out[c] = scratch[k * jstar + j];
                        c += 1;
                    }
                }
            }
            Combination::TensorProduct => {
                // Odometer over (j_1, …, j_d), last index fastest.
                let mut idx = vec![0usize; d];
                for slot in out.iter_mut() {
                    *slot = (0..d).map(|k| scratch[k * jstar + idx[k]]).product();
                    for k in (0..d).rev() {
                        idx[k] += 1;
                        if idx[k] < jstar {
                            break;
                        }
                        idx[k] = 0;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Fills `out[j] = b_j(t)` for `j < out.len()`.
fn univariate_values(family: BasisFamily, t: f64, out: &mut [f64]) {
    match family {
        BasisFamily::LegendreOrthonormal => {
            let mut p0 = 1.0;
            let mut p1 = t;
            for (j, slot) in out.iter_mut().enumerate() {
                let pj = match j {
                    0 => 1.0,
                    1 => t,
                    _ => {
                        let p2 = ((2 * j - 1) as f64 * t * p1 - (j - 1) as f64 * p0) / j as f64;
                        p0 = p1;
                        p1 = p2;
                        p2
                    }
                };
                *slot = libm::sqrt((2 * j + 1) as f64) * pj;
            }
        }
        BasisFamily::Fourier => {
            for (j, slot) in out.iter_mut().enumerate() {
                *slot = fourier_basis(j, t);
            }
        }
    }
}

/// Orthonormal Legendre polynomial `√(2j+1)·P_j(x)`.
pub fn legendre_orthonormal(j: usize, x: f64) -> Result<f64> {
    if j > MAX_LEGENDRE_DEGREE {
        return Err(Error::InvalidInput(alloc::format!(
            "Legendre degree {j} exceeds {MAX_LEGENDRE_DEGREE}"
        )));
    }
    if !(x.abs() <= 1.0 + 1e-12) {
        return Err(Error::InvalidInput(alloc::format!("{x} lies outside [-1, 1]")));
    }
    let mut vals = vec![0.0; j + 1];
    univariate_values(BasisFamily::LegendreOrthonormal, x.clamp(-1.0, 1.0), &mut vals);
    Ok(vals[j])
}

/// `1`, then `√2 cos(kπx)` at odd `j = 2k − 1` and `√2 sin(kπx)` at even `j = 2k`.
pub fn fourier_basis(j: usize, x: f64) -> f64 {
    if j == 0 {
        return 1.0;
    }
    let k = j.div_ceil(2) as f64;
    let arg = k * core::f64::consts::PI * x;
    core::f64::consts::SQRT_2 * if j % 2 == 1 { libm::cos(arg) } else { libm::sin(arg) }
}

/// Evaluations `B_n(X_i)` for every row of a covariate matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    values: Matrix,
    spec: BasisSpec,
}

impl DesignMatrix {
    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn spec(&self) -> &BasisSpec {
        &self.spec
    }

    pub fn n(&self) -> usize {
        self.values.rows()
    }

    pub fn num_functions(&self) -> usize {
        self.values.cols()
    }

    /// Wraps an arbitrary `n × J` matrix, e.g. a rotated basis.
    pub fn from_matrix(values: Matrix, spec: BasisSpec) -> Self {
        DesignMatrix { values, spec }
    }
}

pub fn build_design(x: &Matrix, spec: &BasisSpec) -> Result<DesignMatrix> {
    if x.rows() == 0 {
        return Err(Error::InvalidInput("design needs at least one row".into()));
    }
    if x.cols() != spec.dims() {
        return Err(Error::InvalidInput(alloc::format!(
            "covariate matrix has {} columns, basis declares {}",
            x.cols(),
            spec.dims()
        )));
    }
    let j = spec.num_functions();
    let mut values = Matrix::zeros(x.rows(), j);
    let mut scratch = vec![0.0; spec.dims() * spec.per_covariate];
    for i in 0..x.rows() {
        spec.evaluate_into(x.row(i), i, &mut scratch, values.row_mut(i))?;
    }
    Ok(DesignMatrix {
        values,
        spec: spec.clone(),
    })
}

/// Grid estimates of `sup_x max_j |b_j(x)|` and `sup_x ‖B_n(x)‖₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisBounds {
    pub xi_hat: f64,
    pub omega_hat: f64,
}

/// Searches a 1001-point grid per axis on `[-1, 1]`.
///
/// Both combinations are separable: for products, `|b|` and `‖B‖²` factor
/// over covariates, and for the additive basis `‖B‖² = 1 + Σ_k Σ_{j≥1} b_j²`.
/// The per-axis maxima therefore give exactly the full-grid maxima.
pub fn basis_bound_diagnostics(spec: &BasisSpec) -> Result<BasisBounds> {
    let d = spec.dims();
    if spec.combination == Combination::TensorProduct && d > 3 {
        return Err(Error::Unsupported(
            "tensor-product bound search is limited to 3 covariates".into(),
        ));
    }
    let jstar = spec.per_covariate;
    let mut vals = vec![0.0; jstar];
    let mut sup_abs = vec![0.0_f64; jstar];
    let mut sup_sq_all = 0.0_f64;
    let mut sup_sq_nonconst = 0.0_f64;
    for g in 0..GRID_POINTS {
        let t = -1.0 + 2.0 * g as f64 / (GRID_POINTS - 1) as f64;
        univariate_values(spec.family, t, &mut vals);
        let mut sq = 0.0;
        for (s, v) in sup_abs.iter_mut().zip(&vals) {
            *s = s.max(v.abs());
            sq += v * v;
        }
        sup_sq_all = sup_sq_all.max(sq);
        sup_sq_nonconst = sup_sq_nonconst.max(sq - vals[0] * vals[0]);
    }
    let max_abs = sup_abs.iter().copied().fold(0.0, f64::max);
    let (xi, omega_sq) = match spec.combination {
        Combination::Additive => (max_abs, 1.0 + d as f64 * sup_sq_nonconst),
        Combination::TensorProduct => (libm::pow(max_abs, d as f64), libm::pow(sup_sq_all, d as f64)),
    };
    Ok(BasisBounds {
        xi_hat: xi,
        omega_hat: libm::sqrt(omega_sq),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{gauss_legendre, sym_eigen, RngStream, SymMatrix};
    use proptest::prelude::*;

    /// Gram–Schmidt of monomials under the uniform measure, in closed form.
    fn gram_schmidt_legendre(j: usize, x: f64) -> f64 {
        match j {
            0 => 1.0,
            1 => libm::sqrt(3.0) * x,
            2 => libm::sqrt(5.0) * (3.0 * x * x - 1.0) / 2.0,
            3 => libm::sqrt(7.0) * (5.0 * x * x * x - 3.0 * x) / 2.0,
            _ => unreachable!(),
        }
    }

    #[test]
    fn legendre_values() {
        assert_eq!(legendre_orthonormal(0, 0.3).unwrap(), 1.0);
        assert!((legendre_orthonormal(1, 1.0).unwrap() - 1.7320508075688772).abs() < 1e-15);
        assert!((legendre_orthonormal(2, 1.0).unwrap() - 2.23606797749979).abs() < 1e-14);
        for j in 0..4 {
            for i in 0..=20 {
                let x = -1.0 + 0.1 * i as f64;
                let got = legendre_orthonormal(j, x).unwrap();
                assert!((got - gram_schmidt_legendre(j, x)).abs() < 1e-13);
            }
        }
        assert!(legendre_orthonormal(65, 0.0).is_err());
        assert!(legendre_orthonormal(64, 1.0 + 1e-13).is_ok());
    }

    #[test]
    fn fourier_values() {
        assert_eq!(fourier_basis(0, 0.7), 1.0);
        assert!((fourier_basis(1, 0.0) - core::f64::consts::SQRT_2).abs() < 1e-15);
        let (nodes, w) = gauss_legendre(64).unwrap();
        let cross: f64 = nodes
            .iter()
            .zip(&w)
            .map(|(x, w)| 0.5 * w * fourier_basis(1, *x) * fourier_basis(2, *x))
            .sum();
        assert!(cross.abs() < 1e-12);
    }

    #[test]
    fn quadrature_orthonormality_both_families() {
        let (nodes, w) = gauss_legendre(64).unwrap();
        for family in [BasisFamily::LegendreOrthonormal, BasisFamily::Fourier] {
            let mut vals = vec![0.0; 11];
            let mut gram = [[0.0; 11]; 11];
            for (x, wt) in nodes.iter().zip(&w) {
                univariate_values(family, *x, &mut vals);
                for j in 0..11 {
                    for k in 0..11 {
                        gram[j][k] += 0.5 * wt * vals[j] * vals[k];
                    }
                }
            }
            for j in 0..11 {
                for k in 0..11 {
                    let want = if j == k { 1.0 } else { 0.0 };
                    assert!((gram[j][k] - want).abs() < 1e-10, "{family:?} {j} {k}");
                }
            }
        }
    }

    #[test]
    fn column_counts() {
        let add = BasisSpec::legendre(3, 2).unwrap();
        assert_eq!(add.num_functions(), 5);
        let tp = BasisSpec::new(
            BasisFamily::LegendreOrthonormal,
            3,
            Combination::TensorProduct,
            vec![(-1.0, 1.0); 2],
        )
        .unwrap();
        assert_eq!(tp.num_functions(), 9);
        let x = Matrix::from_rows(&[[0.1, -0.4], [0.9, 0.2]]).unwrap();
        assert_eq!(build_design(&x, &add).unwrap().num_functions(), 5);
        assert_eq!(build_design(&x, &tp).unwrap().num_functions(), 9);
    }

    #[test]
    fn additive_row_at_origin() {
        let d = build_design(
            &Matrix::from_rows(&[[0.0, 0.0]]).unwrap(),
            &BasisSpec::legendre(3, 2).unwrap(),
        )
        .unwrap();
        let h = -libm::sqrt(5.0) / 2.0;
        let row = d.values().row(0);
        let want = [1.0, 0.0, h, 0.0, h];
        for (g, w) in row.iter().zip(&want) {
            assert!((g - w).abs() < 1e-15);
        }
    }

    #[test]
    fn tensor_product_order() {
        let spec = BasisSpec::new(
            BasisFamily::LegendreOrthonormal,
            2,
            Combination::TensorProduct,
            vec![(-1.0, 1.0); 2],
        )
        .unwrap();
        let row = spec.evaluate(&[0.5, -0.5]).unwrap();
        let s3 = libm::sqrt(3.0);
        // (0,0), (0,1), (1,0), (1,1)
        let want = [1.0, -0.5 * s3, 0.5 * s3, -0.75];
        for (g, w) in row.iter().zip(&want) {
            assert!((g - w).abs() < 1e-14);
        }
    }

    #[test]
    fn out_of_range_and_slack() {
        let spec = BasisSpec::legendre(3, 2).unwrap();
        let x = Matrix::from_rows(&[[0.0, 0.0], [0.2, 1.5]]).unwrap();
        assert_eq!(
            build_design(&x, &spec),
            Err(Error::OutOfRange {
                row: 1,
                column: 1,
                value: 1.5
            })
        );
        let x = Matrix::from_rows(&[[1.0 + 1e-12, -1.0 - 1e-12]]).unwrap();
        let d = build_design(&x, &spec).unwrap();
        assert!((d.values()[(0, 1)] - libm::sqrt(3.0)).abs() < 1e-15);
    }

    #[test]
    fn invalid_specs() {
        assert!(BasisSpec::legendre(0, 1).is_err());
        assert!(BasisSpec::new(BasisFamily::Fourier, 3, Combination::Additive, vec![(1.0, 1.0)]).is_err());
        let tp4 = BasisSpec::new(
            BasisFamily::Fourier,
            2,
            Combination::TensorProduct,
            vec![(-1.0, 1.0); 4],
        )
        .unwrap();
        assert!(matches!(basis_bound_diagnostics(&tp4), Err(Error::Unsupported(_))));
    }

    #[test]
    fn bound_diagnostics() {
        let b = basis_bound_diagnostics(&BasisSpec::legendre(3, 1).unwrap()).unwrap();
        assert!((b.xi_hat - libm::sqrt(5.0)).abs() < 1e-12);
        assert!((b.omega_hat - 3.0).abs() < 1e-12);
        let f = BasisSpec::new(BasisFamily::Fourier, 3, Combination::Additive, vec![(-1.0, 1.0)]).unwrap();
        let b = basis_bound_diagnostics(&f).unwrap();
        assert!((b.xi_hat - core::f64::consts::SQRT_2).abs() < 1e-12);
        let one = basis_bound_diagnostics(&BasisSpec::legendre(1, 2).unwrap()).unwrap();
        assert_eq!((one.xi_hat, one.omega_hat), (1.0, 1.0));
    }

    #[test]
    fn bound_diagnostics_match_brute_force_grid() {
        let spec = BasisSpec::new(
            BasisFamily::LegendreOrthonormal,
            3,
            Combination::TensorProduct,
            vec![(-1.0, 1.0); 2],
        )
        .unwrap();
        let b = basis_bound_diagnostics(&spec).unwrap();
        let (mut xi, mut om) = (0.0_f64, 0.0_f64);
        for a in 0..101 {
            for c in 0..101 {
                let x = [-1.0 + 0.02 * a as f64, -1.0 + 0.02 * c as f64];
                let v = spec.evaluate(&x).unwrap();
                xi = v.iter().fold(xi, |m, b| m.max(b.abs()));
                om = om.max(libm::sqrt(v.iter().map(|b| b * b).sum()));
            }
        }
        assert!((b.xi_hat - xi).abs() < 1e-12 && (b.omega_hat - om).abs() < 1e-12);
    }

    #[test]
    fn empirical_gram_near_identity() {
        let spec = BasisSpec::legendre(3, 2).unwrap();
        let n = 100_000;
        let mut rng = RngStream::new(5);
        let mut x = Matrix::zeros(n, 2);
        for i in 0..n {
            x[(i, 0)] = 2.0 * rng.uniform() - 1.0;
            x[(i, 1)] = 2.0 * rng.uniform() - 1.0;
        }
        let b = build_design(&x, &spec).unwrap();
        let mut gram = b.values().transpose().matmul(b.values()).unwrap();
        gram.scale(1.0 / n as f64);
        let dev = SymMatrix::new(gram.sub(&Matrix::identity(5)).unwrap()).unwrap();
        let e = sym_eigen(&dev).unwrap();
        let spectral = e.eigenvalues.iter().fold(0.0_f64, |m, l| m.max(l.abs()));
        assert!(spectral < 0.05, "{spectral}");
    }

    proptest! {
        #[test]
        fn rescaling_is_exact(lo in -50.0f64..0.0, width in 0.5f64..40.0, u in 0.0f64..1.0, v in 0.0f64..1.0) {
            let hi = lo + width;
            let raw = [lo + u * width, lo + v * width];
            let spec = BasisSpec::new(BasisFamily::LegendreOrthonormal, 4, Combination::Additive, vec![(lo, hi); 2]).unwrap();
            let pre: Vec<f64> = (0..2).map(|k| spec.rescale(k, raw[k]).clamp(-1.0, 1.0)).collect();
            let unit = BasisSpec::legendre(4, 2).unwrap();
            prop_assert_eq!(spec.evaluate(&raw).unwrap(), unit.evaluate(&pre).unwrap());
        }
    }
}
