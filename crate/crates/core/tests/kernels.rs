use proptest::prelude::*;
use rqlp::random::{gaussian_matrix, random_orthogonal};
use rqlp::svd::singular_values;
use rqlp::{qr_column_pivoted, qr_unpivoted, Matrix, RngState};

/// Gaussian matrix, optionally multiplied down to a lower rank so pivoting
/// and downdating see exact cancellation.
fn test_matrix(m: usize, n: usize, rank: Option<usize>, seed: u64) -> Matrix {
    let mut rng = RngState::new(seed);
    match rank {
        Some(r) if r < m.min(n) => {
            let left: Matrix = gaussian_matrix(&mut rng, m, r);
            let right: Matrix = gaussian_matrix(&mut rng, r, n);
            left.matmul(&right).unwrap()
        }
        _ => gaussian_matrix(&mut rng, m, n),
    }
}

fn shapes() -> impl Strategy<Value = (usize, usize, Option<usize>, u64)> {
    (1usize..40, 1usize..40, prop::option::of(0usize..10), any::<u64>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn unpivoted_qr_invariants((m, n, rank, seed) in shapes()) {
        let (m, n) = (m.max(n), m.min(n));
        let a = test_matrix(m, n, rank, seed);
        let f = qr_unpivoted(&a).unwrap();
        prop_assert!(f.q.orthogonality_defect() <= 1e-12 * (f.q.cols() as f64).sqrt());
        prop_assert_eq!(f.r_factor.max_abs_below_diagonal(), 0.0);
        prop_assert!(f.r_factor.diagonal().iter().all(|&d| d >= 0.0));
        let recon = f.q.matmul(&f.r_factor).unwrap();
        prop_assert!(recon.sub(&a).unwrap().frobenius_norm() <= 1e-13 * a.frobenius_norm().max(f64::MIN_POSITIVE));
    }

    #[test]
    fn pivoted_qr_invariants((m, n, rank, seed) in shapes()) {
        let a = test_matrix(m, n, rank, seed);
        let f = qr_column_pivoted(&a);
        let mut sorted = f.perm.clone();
        sorted.sort_unstable();
        prop_assert_eq!(sorted, (0..n).collect::<Vec<_>>());
        prop_assert!(f.q.orthogonality_defect() <= 1e-12 * (f.q.cols() as f64).sqrt());
        prop_assert_eq!(f.r_factor.max_abs_below_diagonal(), 0.0);
        let r = f.r_values();
        for w in r.windows(2) {
            prop_assert!(w[0] >= w[1], "R-values increase: {:?}", r);
        }
        let recon = f.q.matmul(&f.r_factor).unwrap();
        let target = f.permuted_input(&a);
        prop_assert!(recon.sub(&target).unwrap().frobenius_norm() <= 1e-13 * a.frobenius_norm().max(f64::MIN_POSITIVE));
    }

    #[test]
    fn frobenius_matches_singular_values((m, n, rank, seed) in shapes()) {
        let a = test_matrix(m, n, rank, seed);
        let sv = singular_values(&a).unwrap();
        prop_assert_eq!(sv.len(), m.min(n));
        let total: f64 = sv.as_slice().iter().map(|s| s * s).sum();
        prop_assert!((total - a.frobenius_norm_sq()).abs() <= 1e-10 * a.frobenius_norm_sq().max(f64::MIN_POSITIVE));
        prop_assert!(sv.as_slice().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn singular_values_are_orthogonally_invariant(n in 2usize..20, seed in any::<u64>()) {
        let mut rng = RngState::new(seed);
        let a: Matrix = gaussian_matrix(&mut rng, n, n);
        let u: Matrix = random_orthogonal(&mut rng, n);
        let before = singular_values(&a).unwrap();
        let after = singular_values(&u.matmul(&a).unwrap()).unwrap();
        for j in 0..n {
            prop_assert!((before[j] - after[j]).abs() <= 1e-12 * before[0]);
        }
    }

    #[test]
    fn interlacing((m, n, rank, seed) in shapes(), width in 1usize..40) {
        let a = test_matrix(m, n, rank, seed);
        let width = width.min(m);
        let v = qr_unpivoted(&gaussian_matrix::<f64>(&mut RngState::new(seed ^ 1), m, width)).unwrap().q;
        let full = singular_values(&a).unwrap();
        let compressed = singular_values(&v.tr_matmul(&a).unwrap()).unwrap();
        for j in 0..compressed.len() {
            prop_assert!(compressed[j] <= full[j] + 1e-10 * full.first());
        }
    }

    #[test]
    fn two_by_two_against_closed_form(entries in prop::array::uniform4(-10.0f64..10.0)) {
        let a = Matrix::from_rows(&[[entries[0], entries[1]], [entries[2], entries[3]]]).unwrap();
        let (hi, lo) = closed_form(&entries);
        let sv = singular_values(&a).unwrap();
        prop_assert!((sv[0] - hi).abs() <= 1e-12 * hi.max(1.0));
        prop_assert!((sv[1] - lo).abs() <= 1e-12 * hi.max(1.0));
    }
}

/// Roots of `λ² − ‖A‖²_F·λ + det(A)² = 0`, square-rooted.
fn closed_form(e: &[f64; 4]) -> (f64, f64) {
    let s = e.iter().map(|x| x * x).sum::<f64>();
    let det = (e[0] * e[3] - e[1] * e[2]).abs();
    let disc = ((s - 2.0 * det) * (s + 2.0 * det)).max(0.0).sqrt();
    let hi = ((s + disc) / 2.0).sqrt();
    let lo = if hi > 0.0 { det / hi } else { 0.0 };
    (hi, lo)
}

#[test]
fn every_small_integer_two_by_two() {
    let vals = [-2.0, -1.0, 0.0, 1.0, 2.0];
    for &a in &vals {
        for &b in &vals {
            for &c in &vals {
                for &d in &vals {
                    let m = Matrix::from_rows(&[[a, b], [c, d]]).unwrap();
                    let (hi, lo) = closed_form(&[a, b, c, d]);
                    let sv = singular_values(&m).unwrap();
                    assert!((sv[0] - hi).abs() <= 1e-12, "{a} {b} {c} {d}");
                    assert!((sv[1] - lo).abs() <= 1e-12, "{a} {b} {c} {d}");
                }
            }
        }
    }
}

#[test]
fn pivoted_qr_reconstruction_at_500() {
    let a = test_matrix(500, 500, None, 99);
    let f = qr_column_pivoted(&a);
    let recon = f.q.matmul(&f.r_factor).unwrap();
    let rel = recon.sub(&f.permuted_input(&a)).unwrap().frobenius_norm() / a.frobenius_norm();
    assert!(rel <= 1e-13, "{rel}");
    assert!(f.q.orthogonality_defect() <= 1e-12 * 500f64.sqrt());
}
