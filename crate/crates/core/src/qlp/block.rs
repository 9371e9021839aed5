use crate::error::Result;
use crate::matrix::{axpy, DenseMatrix, Operator};
use crate::qr::qr_unpivoted;
use crate::random::{gaussian_matrix, RngState};
use crate::scalar::Scalar;

use super::pivoted::pivoted_qlp_parts;
use super::{Algorithm, QlpFactorization, RandomizedRun, SketchConfig, Triangle};

/// Blocked randomized QLP.
pub fn brqlp<T: Scalar, O: Operator<T> + ?Sized>(a: &O, cfg: &SketchConfig) -> Result<QlpFactorization<T>> {
    Ok(brqlp_run(a, cfg)?.factorization)
}

/// Builds the range basis `b` columns at a time. Each block is sketched from
/// the original `A`, orthonormalized, re-orthogonalized against earlier
/// blocks, then used to deflate a working copy `A⁽ʲ⁾ = A⁽ʲ⁻¹⁾ − Vⱼ·Bⱼ`; the
/// block row `Bⱼ = Vⱼᵀ·A⁽ʲ⁻¹⁾` gets its own pivoted QLP.
///
/// `Ω` is drawn in full before slicing, so the same seed gives the same `Ω`
/// as [`super::rqlp`] and hence the same projector.
pub fn brqlp_run<T: Scalar, O: Operator<T> + ?Sized>(a: &O, cfg: &SketchConfig) -> Result<RandomizedRun<T>> {
    cfg.validate(a.shape(), Algorithm::Brqlp)?;
    let (_, n) = a.shape();
    let ell = cfg.ell();
    let b = cfg.block();
    let blocks = ell / b;

    let mut rng = RngState::new(cfg.seed);
    let omega = gaussian_matrix(&mut rng, n, ell);
    let mut work = a.to_dense();

    let mut vs: Vec<DenseMatrix<T>> = Vec::with_capacity(blocks);
    let mut bs = Vec::with_capacity(blocks);
    let mut qs = Vec::with_capacity(blocks);
    let mut ls = Vec::with_capacity(blocks);
    let mut ps = Vec::with_capacity(blocks);
    let mut r_factors = Vec::with_capacity(2 * blocks);

    for j in 0..blocks {
        let y = a.apply(&omega.columns(j * b..(j + 1) * b))?;
        let mut vj = qr_unpivoted(&y)?.q;
        if j > 0 {
            let previous = DenseMatrix::hcat(&vs)?;
            let overlap = previous.tr_matmul(&vj)?;
            let projected = vj.sub(&previous.matmul(&overlap)?)?;
            vj = qr_unpivoted(&projected)?.q;
        }

        let bj = vj.tr_matmul(&work)?;
        deflate(&mut work, &vj, &bj);

        let parts = pivoted_qlp_parts(&bj);
        qs.push(vj.matmul(&parts.q)?);
        ls.push(parts.l_factor);
        ps.push(parts.p);
        r_factors.push(parts.r_first);
        r_factors.push(parts.r_second);
        vs.push(vj);
        bs.push(bj);
    }

    let factorization = QlpFactorization {
        q: DenseMatrix::hcat(&qs)?,
        l_factor: DenseMatrix::block_diagonal(&ls),
        p: DenseMatrix::hcat(&ps)?,
        algorithm: Algorithm::Brqlp,
        triangle: Triangle::Lower,
        config: Some(*cfg),
        block_size: Some(b),
    };
    Ok(RandomizedRun {
        factorization,
        range: DenseMatrix::hcat(&vs)?,
        reduced: DenseMatrix::vcat(&bs)?,
        r_factors,
    })
}

/// `work ← work − v·bj`, column by column.
fn deflate<T: Scalar>(work: &mut DenseMatrix<T>, v: &DenseMatrix<T>, bj: &DenseMatrix<T>) {
    for c in 0..work.cols() {
        let col = work.col_mut(c);
        for t in 0..v.cols() {
            axpy(-bj[(t, c)], v.col(t), col);
        }
    }
}
