//! Householder QR, with and without greedy column pivoting.

use crate::error::{Error, Result};
use crate::matrix::{axpy, dot, norm2, DenseMatrix};
use crate::scalar::Scalar;

/// Thin QR factorization `A·Π = Q·R`.
///
/// `q` is `m×r` with orthonormal columns and `r_factor` is `r×n` upper
/// trapezoidal, where `r = min(m, n)`. Column `j` of `A·Π` is column
/// `perm[j]` of `A`. Diagonal entries of `r_factor` are nonnegative.
#[derive(Clone, Debug)]
pub struct PivotedQrResult<T> {
    pub q: DenseMatrix<T>,
    pub r_factor: DenseMatrix<T>,
    pub perm: Vec<usize>,
    pub pivoted: bool,
}

impl<T: Scalar> PivotedQrResult<T> {
    /// `|r_jj|`, the R-values.
    pub fn r_values(&self) -> Vec<T> {
        self.r_factor.diagonal().into_iter().map(|x| x.abs()).collect()
    }

    /// The input with its columns permuted, `A·Π`.
    pub fn permuted_input(&self, a: &DenseMatrix<T>) -> DenseMatrix<T> {
        a.permute_columns(&self.perm)
    }
}

/// Unpivoted Householder QR of a tall or square matrix.
pub fn qr_unpivoted<T: Scalar>(a: &DenseMatrix<T>) -> Result<PivotedQrResult<T>> {
    if a.rows() < a.cols() {
        return Err(Error::Shape {
            op: "qr_unpivoted",
            shape: a.shape(),
            reason: "thin QR needs rows >= cols".into(),
        });
    }
    Ok(householder(a.clone(), false))
}

/// Householder QR with Golub-Businger column pivoting; any shape.
pub fn qr_column_pivoted<T: Scalar>(a: &DenseMatrix<T>) -> PivotedQrResult<T> {
    householder(a.clone(), true)
}

fn householder<T: Scalar>(mut work: DenseMatrix<T>, pivot: bool) -> PivotedQrResult<T> {
    let (m, n) = work.shape();
    let r = m.min(n);
    let mut perm: Vec<usize> = (0..n).collect();
    let mut taus = vec![T::zero(); r];

    // Running (downdated) squared column norms and the values they were last recomputed from.
    let mut norms_sq: Vec<T> = Vec::new();
    let mut ref_sq: Vec<T> = Vec::new();
    if pivot {
        norms_sq = (0..n).map(|j| sq(norm2(work.col(j)))).collect();
        ref_sq = norms_sq.clone();
    }
    let downdate_tol = T::lit(T::NORM_DOWNDATE_TOL);

    for j in 0..r {
        if pivot {
            let mut best = j;
            for c in j + 1..n {
                if norms_sq[c] > norms_sq[best] {
                    best = c;
                }
            }
            if best != j {
                work.swap_cols(j, best);
                perm.swap(j, best);
                norms_sq.swap(j, best);
                ref_sq.swap(j, best);
            }
        }

        let tau = make_reflector(&mut work.col_mut(j)[j..]);
        taus[j] = tau;

        if tau != T::zero() {
            let (head, tail) = split_at_col(&mut work, j + 1);
            let v = &head[j * m + j..(j + 1) * m];
            for c in 0..n - j - 1 {
                let col = &mut tail[c * m + j..(c + 1) * m];
                apply_reflector(v, tau, col);
            }
        }

        if pivot {
            for c in j + 1..n {
                if norms_sq[c] == T::zero() {
                    continue;
                }
                let rjc = work[(j, c)];
                let updated = norms_sq[c] - rjc * rjc;
                if updated <= downdate_tol * ref_sq[c] {
                    let fresh = sq(norm2(&work.col(c)[j + 1..]));
                    norms_sq[c] = fresh;
                    ref_sq[c] = fresh;
                } else {
                    norms_sq[c] = updated;
                }
            }
        }
    }

    let mut r_factor = DenseMatrix::zeros(r, n);
    for c in 0..n {
        for i in 0..r.min(c + 1) {
            r_factor[(i, c)] = work[(i, c)];
        }
    }

    let mut q = DenseMatrix::eye(m, r);
    for j in (0..r).rev() {
        let tau = taus[j];
        if tau == T::zero() {
            continue;
        }
        let v = &work.col(j)[j..];
        for c in j..r {
            apply_reflector(v, tau, &mut q.col_mut(c)[j..]);
        }
    }

    for i in 0..r {
        if r_factor[(i, i)] < T::zero() {
            for c in i..n {
                r_factor[(i, c)] = -r_factor[(i, c)];
            }
            for x in q.col_mut(i) {
                *x = -*x;
            }
        }
    }

    PivotedQrResult {
        q,
        r_factor,
        perm,
        pivoted: pivot,
    }
}

#[inline]
fn sq<T: Scalar>(x: T) -> T {
    x * x
}

fn split_at_col<T: Scalar>(m: &mut DenseMatrix<T>, c: usize) -> (&mut [T], &mut [T]) {
    let rows = m.rows();
    m.data_mut().split_at_mut(c * rows)
}

/// Overwrites `x` with `[beta, v₁, v₂, …]` where `H = I − tau·v·vᵀ` (v₀ = 1)
/// maps `x` to `beta·e₁`. Returns `tau`; zero means `H = I`.
fn make_reflector<T: Scalar>(x: &mut [T]) -> T {
    if x.len() <= 1 {
        return T::zero();
    }
    let alpha = x[0];
    let tail_norm = norm2(&x[1..]);
    if tail_norm == T::zero() {
        return T::zero();
    }
    let norm = alpha.hypot(tail_norm);
    let beta = if alpha >= T::zero() { -norm } else { norm };
    let tau = (beta - alpha) / beta;
    let scale = T::one() / (alpha - beta);
    for v in &mut x[1..] {
        *v *= scale;
    }
    x[0] = beta;
    tau
}

/// `col ← (I − tau·v·vᵀ)·col` with the implicit leading one in `v`.
#[inline]
fn apply_reflector<T: Scalar>(v: &[T], tau: T, col: &mut [T]) {
    let w = col[0] + dot(&v[1..], &col[1..]);
    let s = tau * w;
    col[0] -= s;
    axpy(-s, &v[1..], &mut col[1..]);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(rows: usize, cols: usize, salt: u64) -> DenseMatrix<f64> {
        let mut s = salt.wrapping_mul(0x2545_F491_4F6C_DD1D) | 1;
        DenseMatrix::from_fn(rows, cols, |_, _| {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        })
    }

    fn reconstruction_error(a: &DenseMatrix<f64>, f: &PivotedQrResult<f64>) -> f64 {
        let qr = f.q.matmul(&f.r_factor).unwrap();
        qr.sub(&f.permuted_input(a)).unwrap().frobenius_norm() / a.frobenius_norm()
    }

    #[test]
    fn identity_factors_trivially() {
        let f = qr_unpivoted(&DenseMatrix::<f64>::identity(5)).unwrap();
        assert_eq!(f.q, DenseMatrix::identity(5));
        assert_eq!(f.r_factor, DenseMatrix::identity(5));
        assert!(!f.pivoted);
        assert_eq!(f.perm, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn pythagorean_column() {
        let a = DenseMatrix::<f64>::from_rows(&[[3.0], [4.0]]).unwrap();
        let f = qr_unpivoted(&a).unwrap();
        assert!((f.r_factor[(0, 0)] - 5.0).abs() < 1e-15);
        assert!((f.q[(0, 0)] - 0.6).abs() < 1e-15);
        assert!((f.q[(1, 0)] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn unpivoted_random_reconstructs() {
        let a = sample(8, 5, 11);
        let f = qr_unpivoted(&a).unwrap();
        assert!(reconstruction_error(&a, &f) <= 1e-14);
        assert!(f.q.orthogonality_defect() <= 1e-13);
        assert_eq!(f.r_factor.max_abs_below_diagonal(), 0.0);
        assert!(f.r_factor.diagonal().iter().all(|&d| d >= 0.0));
    }

    #[test]
    fn unpivoted_rejects_wide_input() {
        assert!(matches!(
            qr_unpivoted(&DenseMatrix::<f64>::zeros(2, 3)),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn rank_deficient_input_still_factors() {
        let mut a = sample(6, 4, 5);
        for i in 0..6 {
            a[(i, 2)] = 2.0 * a[(i, 0)] - a[(i, 1)];
        }
        let f = qr_unpivoted(&a).unwrap();
        assert!(reconstruction_error(&a, &f) <= 1e-14);
        assert!(f.r_factor[(2, 2)].abs() <= 1e-14);
    }

    #[test]
    fn pivoting_orders_diagonal_input() {
        let a = DenseMatrix::from_diagonal(&[1.0, 2.0, 3.0]);
        let f = qr_column_pivoted(&a);
        assert_eq!(f.perm, vec![2, 1, 0]);
        assert_eq!(f.r_values(), vec![3.0, 2.0, 1.0]);
    }

    #[test]
    fn zero_matrix_keeps_identity_permutation() {
        let f = qr_column_pivoted(&DenseMatrix::<f64>::zeros(4, 4));
        assert_eq!(f.perm, vec![0, 1, 2, 3]);
        assert_eq!(f.r_factor.max_abs(), 0.0);
        assert!(f.q.orthogonality_defect() <= 1e-15);
    }

    #[test]
    fn ties_prefer_lowest_index() {
        let a = DenseMatrix::from_rows(&[[1.0, 0.0, 1.0], [0.0, 1.0, 0.0]]).unwrap();
        let f = qr_column_pivoted(&a);
        assert_eq!(f.perm[0], 0);
    }

    #[test]
    fn pivoted_random_is_rank_revealing() {
        let a = sample(6, 6, 17);
        let f = qr_column_pivoted(&a);
        let rv = f.r_values();
        assert!(rv.windows(2).all(|w| w[0] >= w[1]));
        assert!(reconstruction_error(&a, &f) <= 1e-13);
    }

    #[test]
    fn pivoted_wide_input() {
        let a = sample(3, 7, 23);
        let f = qr_column_pivoted(&a);
        assert_eq!(f.q.shape(), (3, 3));
        assert_eq!(f.r_factor.shape(), (3, 7));
        assert!(reconstruction_error(&a, &f) <= 1e-14);
        assert!(f.r_values().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn downdating_recomputes_after_cancellation() {
        // Columns that are nearly parallel force the downdated norm through the threshold.
        let base = sample(50, 1, 3);
        let noise = sample(50, 6, 4);
        let a = DenseMatrix::from_fn(50, 6, |i, j| base[(i, 0)] + 1e-7 * noise[(i, j)]);
        let f = qr_column_pivoted(&a);
        let rv = f.r_values();
        assert!(rv.windows(2).all(|w| w[0] >= w[1] * (1.0 - 1e-6)), "{rv:?}");
        assert!(reconstruction_error(&a, &f) <= 1e-13);
    }

    #[test]
    fn single_precision_factorization() {
        let a: DenseMatrix<f32> = sample(20, 10, 8).cast();
        let f = qr_column_pivoted(&a);
        let qr = f.q.matmul(&f.r_factor).unwrap();
        let err = qr.sub(&f.permuted_input(&a)).unwrap().frobenius_norm() / a.frobenius_norm();
        assert!(err < 1e-5);
        assert!(f.q.orthogonality_defect() < 1e-5);
    }
}
