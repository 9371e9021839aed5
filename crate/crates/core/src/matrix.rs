//! Column-major dense matrices and the BLAS-like kernels built on them.

use std::fmt;
use std::ops::{Index, IndexMut, Range};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense real matrix stored contiguously in column-major order.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::eye(n, n)
    }

    /// Rectangular identity: ones on the main diagonal, zeros elsewhere.
    pub fn eye(rows: usize, cols: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows.min(cols) {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_col_major(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape {
                op: "from_col_major",
                shape: (rows, cols),
                reason: format!("expected {} entries, got {}", rows * cols, data.len()),
            });
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    /// Builds a matrix from row slices; every row must have the same length.
    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut m = Self::zeros(nrows, ncols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != ncols {
                return Err(Error::Shape {
                    op: "from_rows",
                    shape: (nrows, ncols),
                    reason: format!("row {i} has {} entries", row.len()),
                });
            }
            for (j, &x) in row.iter().enumerate() {
                m[(i, j)] = x;
            }
        }
        Ok(m)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        DenseMatrix { rows, cols, data }
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[T] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [T] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// Mutable access to two distinct columns at once.
    pub fn col_pair_mut(&mut self, p: usize, q: usize) -> (&mut [T], &mut [T]) {
        assert_ne!(p, q, "col_pair_mut needs distinct columns");
        let m = self.rows;
        if p < q {
            let (lo, hi) = self.data.split_at_mut(q * m);
            (&mut lo[p * m..(p + 1) * m], &mut hi[..m])
        } else {
            let (lo, hi) = self.data.split_at_mut(p * m);
            (&mut hi[..m], &mut lo[q * m..(q + 1) * m])
        }
    }

    pub fn swap_cols(&mut self, p: usize, q: usize) {
        if p != q {
            let (a, b) = self.col_pair_mut(p, q);
            a.swap_with_slice(b);
        }
    }

    pub fn row(&self, i: usize) -> Vec<T> {
        (0..self.cols).map(|j| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for j in 0..self.cols {
            for (i, &x) in self.col(j).iter().enumerate() {
                t.data[i * self.cols + j] = x;
            }
        }
        t
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    /// Copy of the columns in `range`.
    pub fn columns(&self, range: Range<usize>) -> Self {
        assert!(range.end <= self.cols, "column range out of bounds");
        DenseMatrix {
            rows: self.rows,
            cols: range.len(),
            data: self.data[range.start * self.rows..range.end * self.rows].to_vec(),
        }
    }

    pub fn submatrix(&self, rows: Range<usize>, cols: Range<usize>) -> Self {
        assert!(rows.end <= self.rows && cols.end <= self.cols, "submatrix out of bounds");
        let r0 = rows.start;
        let c0 = cols.start;
        Self::from_fn(rows.len(), cols.len(), |i, j| self[(r0 + i, c0 + j)])
    }

    /// Horizontal concatenation `[b₁ b₂ …]`.
    pub fn hcat(blocks: &[Self]) -> Result<Self> {
        let rows = blocks.first().map_or(0, |b| b.rows);
        let mut data = Vec::new();
        let mut cols = 0;
        for b in blocks {
            if b.rows != rows {
                return Err(Error::DimensionMismatch {
                    op: "hcat",
                    left: (rows, cols),
                    right: b.shape(),
                });
            }
            data.extend_from_slice(&b.data);
            cols += b.cols;
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    /// Vertical concatenation of row blocks.
    pub fn vcat(blocks: &[Self]) -> Result<Self> {
        let cols = blocks.first().map_or(0, |b| b.cols);
        let rows = blocks.iter().map(|b| b.rows).sum();
        let mut out = Self::zeros(rows, cols);
        let mut r0 = 0;
        for b in blocks {
            if b.cols != cols {
                return Err(Error::DimensionMismatch {
                    op: "vcat",
                    left: (r0, cols),
                    right: b.shape(),
                });
            }
            for j in 0..cols {
                out.data[j * rows + r0..j * rows + r0 + b.rows].copy_from_slice(b.col(j));
            }
            r0 += b.rows;
        }
        Ok(out)
    }

    pub fn block_diagonal(blocks: &[Self]) -> Self {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for j in 0..b.cols {
                for i in 0..b.rows {
                    out[(r0 + i, c0 + j)] = b[(i, j)];
                }
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        out
    }

    /// `self · rhs`.
    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        matmul(self, rhs)
    }

    /// `selfᵀ · rhs` without forming the transpose.
    pub fn tr_matmul(&self, rhs: &Self) -> Result<Self> {
        if self.rows != rhs.rows {
            return Err(Error::DimensionMismatch {
                op: "tr_matmul",
                left: (self.cols, self.rows),
                right: rhs.shape(),
            });
        }
        let mut out = Self::zeros(self.cols, rhs.cols);
        for j in 0..rhs.cols {
            let b = rhs.col(j);
            for i in 0..self.cols {
                out.data[j * self.cols + i] = dot(self.col(i), b);
            }
        }
        Ok(out)
    }

    /// `self · rhsᵀ`.
    pub fn matmul_tr(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.cols {
            return Err(Error::DimensionMismatch {
                op: "matmul_tr",
                left: self.shape(),
                right: (rhs.cols, rhs.rows),
            });
        }
        matmul(self, &rhs.transpose())
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, "add", |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, "sub", |a, b| a - b)
    }

    fn zip_with(&self, rhs: &Self, op: &'static str, f: impl Fn(T, T) -> T) -> Result<Self> {
        if self.shape() != rhs.shape() {
            return Err(Error::DimensionMismatch {
                op,
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        let data = self.data.iter().zip(&rhs.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|x| x * s)
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> T {
        norm2(&self.data)
    }

    pub fn frobenius_norm_sq(&self) -> T {
        self.data.iter().map(|&x| x * x).sum()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Column permutation `self · Π`: column `j` of the result is column `perm[j]` of `self`.
    pub fn permute_columns(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.cols, "permutation length");
        let mut data = Vec::with_capacity(self.data.len());
        for &src in perm {
            data.extend_from_slice(self.col(src));
        }
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    /// Row permutation `Π · self`: row `i` of `self` lands in row `perm[i]` of the result.
    pub fn scatter_rows(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.rows, "permutation length");
        let mut out = Self::zeros(self.rows, self.cols);
        for j in 0..self.cols {
            let src = self.col(j);
            let dst = &mut out.data[j * self.rows..(j + 1) * self.rows];
            for (i, &x) in src.iter().enumerate() {
                dst[perm[i]] = x;
            }
        }
        out
    }

    /// Largest magnitude strictly above the main diagonal.
    pub fn max_abs_above_diagonal(&self) -> T {
        let mut m = T::zero();
        for j in 0..self.cols {
            for i in 0..j.min(self.rows) {
                m = m.max(self[(i, j)].abs());
            }
        }
        m
    }

    /// Largest magnitude strictly below the main diagonal.
    pub fn max_abs_below_diagonal(&self) -> T {
        let mut m = T::zero();
        for j in 0..self.cols {
            for i in (j + 1).min(self.rows)..self.rows {
                m = m.max(self[(i, j)].abs());
            }
        }
        m
    }

    /// `‖selfᵀ self − I‖_F`, the loss of orthonormality of the columns.
    pub fn orthogonality_defect(&self) -> T {
        let g = self.tr_matmul(self).expect("square Gram matrix");
        let mut s = T::zero();
        for j in 0..g.cols {
            for i in 0..g.rows {
                let e = if i == j { g[(i, j)] - T::one() } else { g[(i, j)] };
                s += e * e;
            }
        }
        s.sqrt()
    }

    pub fn cast<U: Scalar>(&self) -> DenseMatrix<U> {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| U::lit(x.as_f64())).collect(),
        }
    }
}

impl<T> Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[j * self.rows + i]
    }
}

impl<T> IndexMut<(usize, usize)> for DenseMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[j * self.rows + i]
    }
}

impl<T: fmt::Debug> fmt::Debug for DenseMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(12) {
            write!(f, " ")?;
            for j in 0..self.cols.min(8) {
                write!(f, " {:>12.5?}", self[(i, j)])?;
            }
            writeln!(f, "{}", if self.cols > 8 { " …" } else { "" })?;
        }
        if self.rows > 12 {
            writeln!(f, "  …")?;
        }
        write!(f, "]")
    }
}

#[inline]
pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    let mut acc = [T::zero(); 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let k = 4 * c;
        acc[0] += a[k] * b[k];
        acc[1] += a[k + 1] * b[k + 1];
        acc[2] += a[k + 2] * b[k + 2];
        acc[3] += a[k + 3] * b[k + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for k in 4 * chunks..a.len() {
        s += a[k] * b[k];
    }
    s
}

/// `y += alpha · x`
#[inline]
pub(crate) fn axpy<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Overflow- and underflow-safe Euclidean norm.
pub(crate) fn norm2<T: Scalar>(x: &[T]) -> T {
    let scale = x.iter().fold(T::zero(), |m, &v| m.max(v.abs()));
    if scale == T::zero() || !scale.is_finite() {
        return scale;
    }
    let inv = T::one() / scale;
    let ssq: T = x
        .iter()
        .map(|&v| {
            let s = v * inv;
            s * s
        })
        .sum();
    scale * ssq.sqrt()
}

const ROW_TILE: usize = 256;

/// Matrix product `a · b`.
pub fn matmul<T: Scalar>(a: &DenseMatrix<T>, b: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    if a.cols != b.rows {
        return Err(Error::DimensionMismatch {
            op: "matmul",
            left: a.shape(),
            right: b.shape(),
        });
    }
    let (m, inner, n) = (a.rows, a.cols, b.cols);
    let mut c = DenseMatrix::zeros(m, n);
    // Four output columns share each pass over a row tile of `a`.
    let mut j = 0;
    while j < n {
        let jw = (n - j).min(4);
        let mut i0 = 0;
        while i0 < m {
            let i1 = (i0 + ROW_TILE).min(m);
            for k in 0..inner {
                let acol = &a.col(k)[i0..i1];
                let coeffs: [T; 4] = std::array::from_fn(|t| {
                    if t < jw {
                        b[(k, j + t)]
                    } else {
                        T::zero()
                    }
                });
                for t in 0..jw {
                    if coeffs[t] != T::zero() {
                        let ccol = &mut c.data[(j + t) * m + i0..(j + t) * m + i1];
                        axpy(coeffs[t], acol, ccol);
                    }
                }
            }
            i0 = i1;
        }
        j += jw;
    }
    Ok(c)
}

pub fn frobenius_norm<T: Scalar>(a: &DenseMatrix<T>) -> T {
    a.frobenius_norm()
}

/// Read access to the input matrix of the randomized algorithms.
///
/// The randomized factorizations only touch `A` through these calls, which
/// lets callers substitute an instrumented or implicit operator.
pub trait Operator<T: Scalar> {
    fn shape(&self) -> (usize, usize);

    /// `A · x`
    fn apply(&self, x: &DenseMatrix<T>) -> Result<DenseMatrix<T>>;

    /// `vᵀ · A`
    fn project(&self, v: &DenseMatrix<T>) -> Result<DenseMatrix<T>>;

    /// An explicit copy of `A`, used where an algorithm deflates a working copy.
    fn to_dense(&self) -> DenseMatrix<T>;
}

impl<T: Scalar> Operator<T> for DenseMatrix<T> {
    fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    fn apply(&self, x: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        matmul(self, x)
    }

    fn project(&self, v: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        v.tr_matmul(self)
    }

    fn to_dense(&self) -> DenseMatrix<T> {
        self.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_product(a: &DenseMatrix<f64>, b: &DenseMatrix<f64>) -> DenseMatrix<f64> {
        DenseMatrix::from_fn(a.rows(), b.cols(), |i, j| {
            (0..a.cols()).map(|k| a[(i, k)] * b[(k, j)]).sum()
        })
    }

    fn pseudo_random(rows: usize, cols: usize, salt: u64) -> DenseMatrix<f64> {
        let mut s = salt.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
        DenseMatrix::from_fn(rows, cols, |_, _| {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
    }

    #[test]
    fn identity_times_matrix() {
        let m = DenseMatrix::from_rows(&[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0], [7.0, 8.0, 9.5]]).unwrap();
        let p = matmul(&DenseMatrix::identity(3), &m).unwrap();
        assert_eq!(p, m);
    }

    #[test]
    fn diagonal_product() {
        let a = DenseMatrix::from_diagonal(&[2.0, 3.0]);
        let b = DenseMatrix::from_diagonal(&[5.0, 7.0]);
        assert_eq!(matmul(&a, &b).unwrap(), DenseMatrix::from_diagonal(&[10.0, 21.0]));
    }

    #[test]
    fn matches_triple_loop() {
        let a = pseudo_random(4, 3, 1);
        let b = pseudo_random(3, 2, 2);
        let c = matmul(&a, &b).unwrap();
        let r = naive_product(&a, &b);
        assert!(c.sub(&r).unwrap().max_abs() <= 1e-14);

        // Shapes crossing the row tile and column blocking boundaries.
        let a = pseudo_random(301, 17, 3);
        let b = pseudo_random(17, 9, 4);
        let c = matmul(&a, &b).unwrap();
        assert!(c.sub(&naive_product(&a, &b)).unwrap().max_abs() <= 1e-13);
        let t = a.tr_matmul(&pseudo_random(301, 5, 5)).unwrap();
        let r = naive_product(&a.transpose(), &pseudo_random(301, 5, 5));
        assert!(t.sub(&r).unwrap().max_abs() <= 1e-13);
    }

    #[test]
    fn dimension_mismatch_reports_both_shapes() {
        let err = matmul(&DenseMatrix::<f64>::zeros(2, 3), &DenseMatrix::zeros(2, 3)).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("(2, 3)"), "{msg}");
        match err {
            Error::DimensionMismatch { left, right, .. } => {
                assert_eq!(left, (2, 3));
                assert_eq!(right, (2, 3));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn frobenius_examples() {
        assert_eq!(DenseMatrix::<f64>::identity(4).frobenius_norm(), 2.0);
        let row = DenseMatrix::from_rows(&[[3.0, 4.0]]).unwrap();
        assert_eq!(frobenius_norm(&row), 5.0);
        let tiny = DenseMatrix::<f64>::from_rows(&[[3e-200, 4e-200]]).unwrap();
        assert!((tiny.frobenius_norm() / 5e-200 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn permutations_are_inverse_pairs() {
        let a = pseudo_random(4, 4, 9);
        let perm = [2, 0, 3, 1];
        // (AΠ)ᵀ = Πᵀ Aᵀ, and scatter_rows applies Π on the left.
        let lhs = a.permute_columns(&perm).transpose();
        let mut inv = [0; 4];
        for (j, &p) in perm.iter().enumerate() {
            inv[p] = j;
        }
        let rhs = a.transpose().scatter_rows(&inv);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn hcat_and_block_diagonal() {
        let a = DenseMatrix::from_rows(&[[1.0], [2.0]]).unwrap();
        let b = DenseMatrix::from_rows(&[[3.0, 4.0], [5.0, 6.0]]).unwrap();
        let h = DenseMatrix::hcat(&[a.clone(), b.clone()]).unwrap();
        assert_eq!(h.row(1), vec![2.0, 5.0, 6.0]);
        let d = DenseMatrix::block_diagonal(&[a, b]);
        assert_eq!(d.shape(), (4, 3));
        assert_eq!(d[(3, 2)], 6.0);
        assert_eq!(d[(0, 1)], 0.0);
        assert!(DenseMatrix::hcat(&[DenseMatrix::<f64>::zeros(2, 1), DenseMatrix::zeros(3, 1)]).is_err());
    }
}
