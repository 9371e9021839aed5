//! Singular-value oracle: one-sided Jacobi on a pivoted-QR preconditioned factor.

use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{dot, DenseMatrix};
use crate::qr::qr_column_pivoted;
use crate::scalar::Scalar;

pub const MAX_SWEEPS: usize = 30;

/// Singular values in non-increasing order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SingularValueList<T> {
    values: Vec<T>,
}

impl<T: Scalar> SingularValueList<T> {
    /// Sorts `values` into non-increasing order; rejects negative or NaN entries.
    pub fn new(mut values: Vec<T>) -> Result<Self> {
        if let Some(bad) = values.iter().find(|v| v.is_nan() || **v < T::zero()) {
            return Err(Error::Config(format!("singular values must be nonnegative, got {bad}")));
        }
        values.sort_by(|a, b| b.partial_cmp(a).expect("no NaN"));
        Ok(SingularValueList { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<T> {
        self.values
    }

    /// Largest value, or zero for an empty list.
    pub fn first(&self) -> T {
        self.values.first().copied().unwrap_or_else(T::zero)
    }

    /// `Σ_{j ≥ from} σ_j²` with zero-based `from`.
    pub fn tail_energy(&self, from: usize) -> T {
        self.values.iter().skip(from).map(|&s| s * s).sum()
    }

    pub fn truncated(&self, k: usize) -> Self {
        SingularValueList {
            values: self.values[..k.min(self.values.len())].to_vec(),
        }
    }
}

impl<T> Index<usize> for SingularValueList<T> {
    type Output = T;

    fn index(&self, j: usize) -> &T {
        &self.values[j]
    }
}

/// All `min(m, n)` singular values of `a`.
///
/// The matrix is first reduced by column-pivoted QR, then one-sided Jacobi
/// runs on the transposed triangular factor, whose columns are nearly
/// orthogonal already and converge in a handful of sweeps.
pub fn singular_values<T: Scalar>(a: &DenseMatrix<T>) -> Result<SingularValueList<T>> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return SingularValueList::new(Vec::new());
    }
    let tall = if m >= n { a.clone() } else { a.transpose() };
    let r = qr_column_pivoted(&tall).r_factor;
    let work = r.transpose();
    jacobi_column_norms(work).and_then(SingularValueList::new)
}

/// `‖a‖₂ = σ₁(a)`.
pub fn spectral_norm<T: Scalar>(a: &DenseMatrix<T>) -> Result<T> {
    Ok(singular_values(a)?.first())
}

/// Hestenes one-sided Jacobi: rotates column pairs until every pair is
/// numerically orthogonal, then returns the column norms.
fn jacobi_column_norms<T: Scalar>(mut w: DenseMatrix<T>) -> Result<Vec<T>> {
    let n = w.cols();
    let tol = T::lit(T::JACOBI_TOL);
    let mut norms_sq: Vec<T> = (0..n).map(|j| dot(w.col(j), w.col(j))).collect();

    for sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        let mut off_mass = T::zero();
        for p in 0..n {
            for q in p + 1..n {
                let (alpha, beta) = (norms_sq[p], norms_sq[q]);
                if alpha == T::zero() || beta == T::zero() {
                    continue;
                }
                let (cp, cq) = w.col_pair_mut(p, q);
                let gamma = dot(cp, cq);
                if gamma.abs() <= tol * (alpha.sqrt() * beta.sqrt()) {
                    continue;
                }
                off_mass += gamma * gamma;
                rotated = true;

                let zeta = (beta - alpha) / (gamma + gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
                    let (xp, yq) = (*x, *y);
                    *x = c * xp - s * yq;
                    *y = s * xp + c * yq;
                }
                norms_sq[p] = dot(cp, cp);
                norms_sq[q] = dot(cq, cq);
            }
        }
        if !rotated {
            return Ok((0..n).map(|j| crate::matrix::norm2(w.col(j))).collect());
        }
        if sweep + 1 == MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps: MAX_SWEEPS,
                off_diagonal: off_mass.sqrt().as_f64(),
            });
        }
    }
    unreachable!("loop returns on its last sweep")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_absolute_values() {
        let a = DenseMatrix::from_diagonal(&[3.0, -2.0, 1.0]);
        assert_eq!(singular_values(&a).unwrap().as_slice(), &[3.0, 2.0, 1.0]);
    }

    #[test]
    fn orthogonal_matrix_has_unit_values() {
        let (c, s) = (0.6f64, 0.8f64);
        let q = DenseMatrix::from_rows(&[[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]).unwrap();
        for v in singular_values(&q).unwrap().as_slice() {
            assert!((v - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn golden_ratio_shear() {
        // AᵀA = [[1,1],[1,2]] has eigenvalues (3 ± √5)/2, so σ = φ and 1/φ.
        let a = DenseMatrix::from_rows(&[[1.0, 1.0], [0.0, 1.0]]).unwrap();
        let sv = singular_values(&a).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((sv[0] - phi).abs() < 1e-15);
        assert!((sv[1] - 1.0 / phi).abs() < 1e-15);
    }

    #[test]
    fn spectral_norm_examples() {
        assert_eq!(spectral_norm(&DenseMatrix::from_diagonal(&[1.0, 5.0, 2.0])).unwrap(), 5.0);
        assert_eq!(spectral_norm(&DenseMatrix::<f64>::zeros(3, 4)).unwrap(), 0.0);
        // ‖u vᵀ‖₂ = ‖u‖‖v‖ with ‖u‖ = 2, ‖v‖ = 3.
        let u = [2.0 / 3.0f64.sqrt(); 3];
        let v = [1.5, 1.5, 1.5, 1.5];
        let a = DenseMatrix::from_fn(3, 4, |i, j| u[i] * v[j]);
        assert!((spectral_norm(&a).unwrap() - 6.0).abs() < 1e-14);
    }

    #[test]
    fn wide_and_tall_agree() {
        let a = DenseMatrix::from_fn(4, 7, |i, j| ((i * 7 + j) as f64 * 0.37).sin());
        let s1 = singular_values(&a).unwrap();
        let s2 = singular_values(&a.transpose()).unwrap();
        assert_eq!(s1.len(), 4);
        for j in 0..4 {
            assert!((s1[j] - s2[j]).abs() < 1e-14 * s1[0]);
        }
    }

    #[test]
    fn list_rejects_negative_and_sorts() {
        assert!(SingularValueList::new(vec![1.0, -1.0]).is_err());
        let l = SingularValueList::new(vec![1.0, 3.0, 2.0]).unwrap();
        assert_eq!(l.as_slice(), &[3.0, 2.0, 1.0]);
        assert_eq!(l.tail_energy(1), 5.0);
    }
}
