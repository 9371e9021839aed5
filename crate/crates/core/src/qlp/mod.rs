//! QLP factorizations `A ≈ Q·L·Pᵀ`: Stewart's pivoted QLP and its randomized
//! variants (plain, with inner QR iterations, and blocked).
//!
//! All randomized variants return rank-ℓ factorizations with ℓ = k + p; use
//! [`truncate`] to cut them down to the target rank.

mod block;
mod pivoted;
mod randomized;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::scalar::Scalar;

pub use block::{brqlp, brqlp_run};
pub use pivoted::{pivoted_qlp, pivoted_qlp_parts, QlpParts};
pub use randomized::{erqlp, erqlp_run, range_finder, rqlp, rqlp_run};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    PivotedQlp,
    Rqlp,
    Erqlp,
    Brqlp,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::PivotedQlp => "qlp",
            Algorithm::Rqlp => "rqlp",
            Algorithm::Erqlp => "erqlp",
            Algorithm::Brqlp => "brqlp",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which triangle of the middle factor carries the nonzeros.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Triangle {
    Lower,
    /// Produced by an even number of inner QR iterations.
    Upper,
}

/// Parameters of the randomized factorizations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SketchConfig {
    /// Target rank `k`.
    pub target_rank: usize,
    /// Oversampling `p`; the sketch has `ℓ = k + p` columns.
    pub oversampling: usize,
    /// Inner unpivoted QR iterations `d` (enhanced variant only).
    pub inner_iterations: usize,
    /// Columns per block `b` (blocked variant only); `None` means one block of `ℓ`.
    pub block_size: Option<usize>,
    pub seed: u64,
}

impl SketchConfig {
    pub fn new(target_rank: usize, oversampling: usize) -> Self {
        SketchConfig {
            target_rank,
            oversampling,
            inner_iterations: 2,
            block_size: None,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_inner_iterations(mut self, d: usize) -> Self {
        self.inner_iterations = d;
        self
    }

    pub fn with_block_size(mut self, b: usize) -> Self {
        self.block_size = Some(b);
        self
    }

    /// Sketch width `ℓ = k + p`.
    pub fn ell(&self) -> usize {
        self.target_rank + self.oversampling
    }

    pub fn block(&self) -> usize {
        self.block_size.unwrap_or_else(|| self.ell())
    }

    /// Checks the configuration against an `rows×cols` input for `algorithm`.
    pub fn validate(&self, (rows, cols): (usize, usize), algorithm: Algorithm) -> Result<()> {
        if algorithm == Algorithm::PivotedQlp {
            return Ok(());
        }
        if self.target_rank < 2 {
            return Err(Error::Config(format!("target rank k = {} must be at least 2", self.target_rank)));
        }
        if self.oversampling < 2 {
            return Err(Error::Config(format!("oversampling p = {} must be at least 2", self.oversampling)));
        }
        let ell = self.ell();
        if ell > cols || ell > rows {
            return Err(Error::Config(format!(
                "sketch width k + p = {ell} exceeds the input dimensions {rows}x{cols}"
            )));
        }
        match algorithm {
            Algorithm::Erqlp if self.inner_iterations == 0 => Err(Error::Config(
                "inner iterations d must be at least 1; use rqlp for d = 0".into(),
            )),
            Algorithm::Brqlp => {
                let b = self.block();
                if b == 0 || ell % b != 0 {
                    Err(Error::Config(format!("block size {b} must divide k + p = {ell}")))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

/// `A ≈ Q·L·Pᵀ` with orthonormal `Q` (m×r), triangular `L` (r×r) and `P` (n×r).
#[derive(Clone, Debug)]
pub struct QlpFactorization<T> {
    pub q: DenseMatrix<T>,
    pub l_factor: DenseMatrix<T>,
    pub p: DenseMatrix<T>,
    pub algorithm: Algorithm,
    pub triangle: Triangle,
    /// Present for the randomized variants.
    pub config: Option<SketchConfig>,
    /// Diagonal block size when `l_factor` is block diagonal.
    pub block_size: Option<usize>,
}

impl<T: Scalar> QlpFactorization<T> {
    pub fn rank(&self) -> usize {
        self.l_factor.cols()
    }

    /// `|L_jj|`, the L-values.
    pub fn l_values(&self) -> Vec<T> {
        self.l_factor.diagonal().into_iter().map(|x| x.abs()).collect()
    }

    /// `Q·L·Pᵀ`.
    pub fn reconstruct(&self) -> Result<DenseMatrix<T>> {
        self.q.matmul(&self.l_factor)?.matmul_tr(&self.p)
    }

    /// `‖A − Q·L·Pᵀ‖_F`.
    pub fn residual_norm(&self, a: &DenseMatrix<T>) -> Result<T> {
        Ok(a.sub(&self.reconstruct()?)?.frobenius_norm())
    }

    pub fn truncate(&self, k: usize) -> Result<Self> {
        truncate(self, k)
    }
}

/// Everything a randomized run produced, for diagnostics and bound evaluation.
#[derive(Clone, Debug)]
pub struct RandomizedRun<T> {
    pub factorization: QlpFactorization<T>,
    /// Orthonormal range basis `V` (m×ℓ).
    pub range: DenseMatrix<T>,
    /// Reduced matrix `B = Vᵀ·A` (ℓ×n).
    pub reduced: DenseMatrix<T>,
    /// Triangular factors in order of computation: the first pivoted QR's R,
    /// then one per later QR step.
    pub r_factors: Vec<DenseMatrix<T>>,
}

/// Keeps the leading `k` columns of `Q` and `P` and the leading `k×k` block of `L`.
pub fn truncate<T: Scalar>(f: &QlpFactorization<T>, k: usize) -> Result<QlpFactorization<T>> {
    if k > f.rank() {
        return Err(Error::Config(format!("cannot truncate rank-{} factorization to {k}", f.rank())));
    }
    if let Some(b) = f.block_size {
        if k % b != 0 {
            return Err(Error::Config(format!(
                "truncation rank {k} must be a multiple of the block size {b}"
            )));
        }
    }
    Ok(QlpFactorization {
        q: f.q.columns(0..k),
        l_factor: f.l_factor.submatrix(0..k, 0..k),
        p: f.p.columns(0..k),
        algorithm: f.algorithm,
        triangle: f.triangle,
        config: f.config,
        block_size: f.block_size,
    })
}

/// `‖A − V·Vᵀ·A‖_F` evaluated as `sqrt(max(0, ‖A‖²_F − ‖B‖²_F))` for `B = Vᵀ·A`.
pub fn error_indicator<T: Scalar>(a: &DenseMatrix<T>, b_reduced: &DenseMatrix<T>) -> T {
    let gap = a.frobenius_norm_sq() - b_reduced.frobenius_norm_sq();
    gap.max(T::zero()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{gaussian_matrix, RngState};

    #[test]
    fn config_rules() {
        let cfg = SketchConfig::new(4, 2);
        assert!(cfg.validate((10, 10), Algorithm::Rqlp).is_ok());
        assert!(cfg.validate((10, 5), Algorithm::Rqlp).is_err());
        assert!(SketchConfig::new(1, 3).validate((10, 10), Algorithm::Rqlp).is_err());
        assert!(SketchConfig::new(3, 1).validate((10, 10), Algorithm::Rqlp).is_err());
        let d0 = cfg.with_inner_iterations(0);
        let msg = d0.validate((10, 10), Algorithm::Erqlp).unwrap_err().to_string();
        assert!(msg.contains("rqlp"), "{msg}");
        assert!(cfg.with_block_size(4).validate((10, 10), Algorithm::Brqlp).is_err());
        assert!(cfg.with_block_size(3).validate((10, 10), Algorithm::Brqlp).is_ok());
    }

    #[test]
    fn indicator_edge_cases() {
        let a: DenseMatrix<f64> = gaussian_matrix(&mut RngState::new(1), 6, 4);
        assert_eq!(error_indicator(&a, &a), 0.0);
        let empty = DenseMatrix::zeros(0, 4);
        assert!((error_indicator(&a, &empty) - a.frobenius_norm()).abs() < 1e-15);
    }

    #[test]
    fn indicator_matches_direct_residual() {
        let mut rng = RngState::new(2);
        let a: DenseMatrix<f64> = gaussian_matrix(&mut rng, 200, 150);
        let v = range_finder(&a, 40, &mut rng).unwrap();
        let b = v.tr_matmul(&a).unwrap();
        let direct = a.sub(&v.matmul(&b).unwrap()).unwrap().frobenius_norm();
        assert!((error_indicator(&a, &b) - direct).abs() <= 1e-8 * a.frobenius_norm());
    }

    #[test]
    fn truncation_rules() {
        let a: DenseMatrix<f64> = gaussian_matrix(&mut RngState::new(4), 30, 20);
        let cfg = SketchConfig::new(6, 2).with_seed(9);
        let f = rqlp(&a, &cfg).unwrap();
        let same = truncate(&f, f.rank()).unwrap();
        assert_eq!(same.l_factor, f.l_factor);
        assert_eq!(same.q, f.q);
        let t = truncate(&f, 5).unwrap();
        assert_eq!(t.q.shape(), (30, 5));
        assert_eq!(t.l_factor.shape(), (5, 5));
        assert_eq!(t.p.shape(), (20, 5));
        assert!(t.residual_norm(&a).unwrap() >= f.residual_norm(&a).unwrap());
        assert!(truncate(&f, 9).is_err());

        let blocked = brqlp(&a, &cfg.with_block_size(4)).unwrap();
        assert!(truncate(&blocked, 6).is_err());
        assert_eq!(truncate(&blocked, 4).unwrap().rank(), 4);
    }

    #[test]
    fn truncating_exact_rank_loses_nothing() {
        let mut rng = RngState::new(5);
        let left: DenseMatrix<f64> = gaussian_matrix(&mut rng, 40, 4);
        let right: DenseMatrix<f64> = gaussian_matrix(&mut rng, 4, 30);
        let a = left.matmul(&right).unwrap();
        let f = rqlp(&a, &SketchConfig::new(4, 3).with_seed(1)).unwrap();
        let before = f.residual_norm(&a).unwrap();
        let after = truncate(&f, 4).unwrap().residual_norm(&a).unwrap();
        assert!((after - before).abs() <= 1e-10 * a.frobenius_norm());
    }
}
