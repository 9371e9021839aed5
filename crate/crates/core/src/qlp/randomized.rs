use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, Operator};
use crate::qr::{qr_column_pivoted, qr_unpivoted};
use crate::random::{gaussian_matrix, RngState};
use crate::scalar::Scalar;

use super::pivoted::pivoted_qlp_parts;
use super::{Algorithm, QlpFactorization, RandomizedRun, SketchConfig, Triangle};

/// Orthonormal basis `V` (m×ℓ) for the range of `A·Ω` with Gaussian `Ω` (n×ℓ).
pub fn range_finder<T: Scalar, O: Operator<T> + ?Sized>(
    a: &O,
    ell: usize,
    rng: &mut RngState,
) -> Result<DenseMatrix<T>> {
    let (m, n) = a.shape();
    if ell > m.min(n) {
        return Err(Error::Config(format!("sketch width {ell} exceeds min({m}, {n})")));
    }
    let omega = gaussian_matrix(rng, n, ell);
    let y = a.apply(&omega)?;
    Ok(qr_unpivoted(&y)?.q)
}

/// Sketch `A`, returning `(V, B = Vᵀ·A)`. Touches `A` exactly twice.
fn sketch<T: Scalar, O: Operator<T> + ?Sized>(
    a: &O,
    cfg: &SketchConfig,
) -> Result<(DenseMatrix<T>, DenseMatrix<T>)> {
    let mut rng = RngState::new(cfg.seed);
    let v = range_finder(a, cfg.ell(), &mut rng)?;
    let b = a.project(&v)?;
    Ok((v, b))
}

/// Randomized QLP: range finder followed by pivoted QLP of `B = Vᵀ·A`.
pub fn rqlp<T: Scalar, O: Operator<T> + ?Sized>(a: &O, cfg: &SketchConfig) -> Result<QlpFactorization<T>> {
    Ok(rqlp_run(a, cfg)?.factorization)
}

pub fn rqlp_run<T: Scalar, O: Operator<T> + ?Sized>(a: &O, cfg: &SketchConfig) -> Result<RandomizedRun<T>> {
    cfg.validate(a.shape(), Algorithm::Rqlp)?;
    let (v, b) = sketch(a, cfg)?;
    let parts = pivoted_qlp_parts(&b);
    let factorization = QlpFactorization {
        q: v.matmul(&parts.q)?,
        l_factor: parts.l_factor,
        p: parts.p,
        algorithm: Algorithm::Rqlp,
        triangle: Triangle::Lower,
        config: Some(*cfg),
        block_size: None,
    };
    Ok(RandomizedRun {
        factorization,
        range: v,
        reduced: b,
        r_factors: vec![parts.r_first, parts.r_second],
    })
}

/// Randomized QLP with `d` unpivoted inner QR iterations on the triangular factor.
pub fn erqlp<T: Scalar, O: Operator<T> + ?Sized>(a: &O, cfg: &SketchConfig) -> Result<QlpFactorization<T>> {
    Ok(erqlp_run(a, cfg)?.factorization)
}

/// Starting from `B·Π = Q⁽⁰⁾·R⁽⁰⁾`, each step factors `R⁽ⁱ⁻¹⁾ᵀ = Q⁽ⁱ⁾·R⁽ⁱ⁾`.
/// Since `R⁽ⁱ⁻¹⁾ = R⁽ⁱ⁾ᵀ·Q⁽ⁱ⁾ᵀ`, even-indexed Q's collect on the left and
/// odd-indexed ones on the right:
///
/// `B = (Q⁽⁰⁾Q⁽²⁾⋯)·M·(Π·Q⁽¹⁾Q⁽³⁾⋯)ᵀ`, with `M = R⁽ᵈ⁾ᵀ` for odd `d` and
/// `M = R⁽ᵈ⁾` (upper triangular) for even `d`.
pub fn erqlp_run<T: Scalar, O: Operator<T> + ?Sized>(a: &O, cfg: &SketchConfig) -> Result<RandomizedRun<T>> {
    cfg.validate(a.shape(), Algorithm::Erqlp)?;
    let d = cfg.inner_iterations;
    let (v, b) = sketch(a, cfg)?;

    let first = qr_column_pivoted(&b);
    let mut left = first.q;
    let mut right: Option<DenseMatrix<T>> = None;
    let mut r_factors = vec![first.r_factor];

    for i in 1..=d {
        let step = qr_unpivoted(&r_factors[i - 1].transpose())?;
        if i % 2 == 1 {
            right = Some(match right {
                None => step.q.scatter_rows(&first.perm),
                Some(acc) => acc.matmul(&step.q)?,
            });
        } else {
            left = left.matmul(&step.q)?;
        }
        r_factors.push(step.r_factor);
    }

    let last = &r_factors[d];
    let (l_factor, triangle) = if d % 2 == 1 {
        (last.transpose(), Triangle::Lower)
    } else {
        (last.clone(), Triangle::Upper)
    };
    let factorization = QlpFactorization {
        q: v.matmul(&left)?,
        l_factor,
        p: right.expect("d >= 1 produces a right factor"),
        algorithm: Algorithm::Erqlp,
        triangle,
        config: Some(*cfg),
        block_size: None,
    };
    Ok(RandomizedRun {
        factorization,
        range: v,
        reduced: b,
        r_factors,
    })
}
