use crate::matrix::DenseMatrix;
use crate::qr::qr_column_pivoted;
use crate::scalar::Scalar;

use super::{Algorithm, QlpFactorization, Triangle};

/// Pieces of a pivoted QLP decomposition, including both R factors.
#[derive(Clone, Debug)]
pub struct QlpParts<T> {
    pub q: DenseMatrix<T>,
    pub l_factor: DenseMatrix<T>,
    pub p: DenseMatrix<T>,
    /// R from the pivoted QR of the input.
    pub r_first: DenseMatrix<T>,
    /// R from the pivoted QR of `r_firstᵀ`; equals `l_factorᵀ`.
    pub r_second: DenseMatrix<T>,
}

/// Two pivoted QRs: `A·Π₀ = Q̂·R`, then `Rᵀ·Π₁ = P̂·Lᵀ`, giving
/// `A = (Q̂·Π₁)·L·(Π₀·P̂)ᵀ`. Any shape; with `r = min(m, n)` the factors
/// are `m×r`, `r×r` and `n×r`.
pub fn pivoted_qlp_parts<T: Scalar>(a: &DenseMatrix<T>) -> QlpParts<T> {
    let first = qr_column_pivoted(a);
    let second = qr_column_pivoted(&first.r_factor.transpose());
    QlpParts {
        q: first.q.permute_columns(&second.perm),
        l_factor: second.r_factor.transpose(),
        p: second.q.scatter_rows(&first.perm),
        r_first: first.r_factor,
        r_second: second.r_factor,
    }
}

/// Stewart's pivoted QLP decomposition; exact up to rounding.
pub fn pivoted_qlp<T: Scalar>(a: &DenseMatrix<T>) -> QlpFactorization<T> {
    let parts = pivoted_qlp_parts(a);
    QlpFactorization {
        q: parts.q,
        l_factor: parts.l_factor,
        p: parts.p,
        algorithm: Algorithm::PivotedQlp,
        triangle: Triangle::Lower,
        config: None,
        block_size: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{gaussian_matrix, random_orthogonal, RngState};
    use crate::svd::singular_values;

    fn check_exact(a: &DenseMatrix<f64>) -> QlpFactorization<f64> {
        let f = pivoted_qlp(a);
        let r = a.rows().min(a.cols());
        assert_eq!(f.q.shape(), (a.rows(), r));
        assert_eq!(f.p.shape(), (a.cols(), r));
        assert!(f.residual_norm(a).unwrap() <= 1e-12 * a.frobenius_norm().max(f64::MIN_POSITIVE));
        assert!(f.q.orthogonality_defect() <= 1e-12 * (r as f64).sqrt());
        assert!(f.p.orthogonality_defect() <= 1e-12 * (r as f64).sqrt());
        assert_eq!(f.l_factor.max_abs_above_diagonal(), 0.0);
        f
    }

    #[test]
    fn diagonal_input() {
        let f = check_exact(&DenseMatrix::from_diagonal(&[3.0, 2.0, 1.0]));
        assert_eq!(f.l_values(), vec![3.0, 2.0, 1.0]);
    }

    #[test]
    fn orthogonal_input_has_unit_l_values() {
        let q: DenseMatrix<f64> = random_orthogonal(&mut RngState::new(12), 20);
        let f = check_exact(&q);
        for v in f.l_values() {
            assert!((v - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn tall_and_wide_inputs() {
        let mut rng = RngState::new(3);
        check_exact(&gaussian_matrix(&mut rng, 30, 12));
        check_exact(&gaussian_matrix(&mut rng, 7, 25));
    }

    #[test]
    fn l_values_track_singular_values() {
        let a: DenseMatrix<f64> = gaussian_matrix(&mut RngState::new(50), 50, 50);
        let f = check_exact(&a);
        let sv = singular_values(&a).unwrap();
        let lv = f.l_values();
        let worst = (0..50).map(|j| (sv[j] - lv[j]).abs()).fold(0.0, f64::max) / sv[0];
        // Loose sanity level; the typical value is far smaller.
        assert!(worst <= 0.2, "max relative deviation {worst}");
    }
}
