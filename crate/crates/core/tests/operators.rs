mod common;

use common::{max_abs_diff, random_matrix, rel_diff, to_na};
use proptest::prelude::*;
use rnorm_core::linalg::householder_r;
use rnorm_core::operator::materialize;
use rnorm_core::{
    compose_gram, compose_incidence, compose_right_solve, CsrMatrix, DenseMatrix, DenseOperator, Error, LinearOperator,
    PairSet, QueryCounts, SparseOperator, TriangularFactor,
};

#[test]
fn identity_apply() {
    let op = DenseOperator::identity(3);
    let e2 = DenseMatrix::column_vector(&[0.0, 1.0, 0.0]);
    assert_eq!(op.apply(&e2).unwrap(), e2);
    assert_eq!(
        op.queries(),
        QueryCounts {
            forward: 1,
            transpose: 0
        }
    );
    let x = random_matrix(3, 4, 1);
    assert_eq!(op.apply_transpose(&x).unwrap(), x);
}

#[test]
fn two_by_two_by_hand() {
    let op = DenseOperator::new(DenseMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]));
    let y = op.apply(&DenseMatrix::column_vector(&[1.0, 1.0])).unwrap();
    assert_eq!(y.as_slice(), &[3.0, 7.0]);
    let z = op.apply_transpose(&DenseMatrix::column_vector(&[1.0, 0.0])).unwrap();
    assert_eq!(z.as_slice(), &[1.0, 2.0]);
    assert_eq!(
        op.queries(),
        QueryCounts {
            forward: 1,
            transpose: 1
        }
    );
}

#[test]
fn bad_blocks_are_rejected_and_not_charged() {
    let op = DenseOperator::identity(3);
    assert!(matches!(
        op.apply(&DenseMatrix::zeros(2, 1)),
        Err(Error::Dimension { .. })
    ));
    let mut x = DenseMatrix::zeros(3, 1);
    x.set(1, 0, f64::NAN);
    assert!(matches!(op.apply(&x), Err(Error::Input(_))));
    assert!(matches!(op.apply_transpose(&x), Err(Error::Input(_))));
    assert_eq!(op.queries().total(), 0);
}

#[test]
fn transpose_matches_dense() {
    let a = random_matrix(8, 5, 2);
    let x = random_matrix(8, 3, 3);
    let op = DenseOperator::new(a.clone());
    let got = op.apply_transpose(&x).unwrap();
    let want = common::from_na(&(to_na(&a).transpose() * to_na(&x)));
    assert!(rel_diff(&got, &want) < 1e-12);
}

#[test]
fn gram_small_cases() {
    let id = DenseOperator::identity(4);
    assert_eq!(materialize(&compose_gram(&id)).unwrap(), DenseMatrix::identity(4));
    let diag = DenseOperator::new(DenseMatrix::from_rows(&[[1.0, 0.0], [0.0, 2.0]]));
    let y = compose_gram(&diag)
        .apply(&DenseMatrix::column_vector(&[3.0, 5.0]))
        .unwrap();
    assert_eq!(y.as_slice(), &[3.0, 20.0]);
}

#[test]
fn gram_matches_dense() {
    for (rows, cols, w, seed) in [(8, 5, 3, 4), (10, 4, 4, 5)] {
        let a = random_matrix(rows, cols, seed);
        let x = random_matrix(cols, w, seed + 100);
        let op = DenseOperator::new(a.clone());
        let gram = compose_gram(&op);
        let got = gram.apply(&x).unwrap();
        let na = to_na(&a);
        let want = common::from_na(&(na.transpose() * &na * to_na(&x)));
        assert!(rel_diff(&got, &want) < 1e-12);
        let got_t = gram.apply_transpose(&x).unwrap();
        assert!(rel_diff(&got_t, &want) < 1e-12);
        // each application of the Gram operator costs w forward and w transpose on A
        assert_eq!(
            op.queries(),
            QueryCounts {
                forward: 2 * w,
                transpose: 2 * w
            }
        );
        assert_eq!(
            gram.queries(),
            QueryCounts {
                forward: w,
                transpose: w
            }
        );
    }
}

#[test]
fn incidence_small_cases() {
    let id = DenseOperator::identity(3);
    let pairs = PairSet::new(vec![(1, 2)]).unwrap();
    let m = materialize(&compose_incidence(&id, &pairs).unwrap()).unwrap();
    assert_eq!(m.as_slice(), &[0.0, 1.0, -1.0]);

    let a = DenseMatrix::from_rows(&[[1.0, 2.0], [5.0, -1.0], [1.0, 2.0]]);
    let op = DenseOperator::new(a);
    let pairs = PairSet::new(vec![(0, 2)]).unwrap();
    let ba = materialize(&compose_incidence(&op, &pairs).unwrap()).unwrap();
    assert!(ba.as_slice().iter().all(|&v| v == 0.0));

    let far = PairSet::new(vec![(0, 3)]).unwrap();
    assert!(matches!(compose_incidence(&op, &far), Err(Error::Index { .. })));
}

#[test]
fn incidence_matches_dense_b() {
    let a = random_matrix(20, 6, 6);
    let pairs = PairSet::all_pairs(20);
    assert_eq!(pairs.len(), 190);
    // dense B built independently of PairSet::to_incidence_matrix
    let mut b = nalgebra::DMatrix::<f64>::zeros(190, 20);
    for (k, (i, j)) in pairs.iter().enumerate() {
        b[(k, i)] = 1.0;
        b[(k, j)] = -1.0;
    }
    assert_eq!(to_na(&pairs.to_incidence_matrix(20)), b);
    let op = DenseOperator::new(a.clone());
    let inc = compose_incidence(&op, &pairs).unwrap();
    let x = random_matrix(6, 3, 7);
    let want = common::from_na(&(&b * to_na(&a) * to_na(&x)));
    assert!(rel_diff(&inc.apply(&x).unwrap(), &want) < 1e-12);
    let z = random_matrix(190, 2, 8);
    let want_t = common::from_na(&(to_na(&a).transpose() * b.transpose() * to_na(&z)));
    assert!(rel_diff(&inc.apply_transpose(&z).unwrap(), &want_t) < 1e-12);
    assert_eq!(
        op.queries(),
        QueryCounts {
            forward: 3,
            transpose: 2
        }
    );
}

#[test]
fn right_solve_identity_factor() {
    let a = random_matrix(7, 3, 9);
    let op = DenseOperator::new(a.clone());
    let r = TriangularFactor::new(DenseMatrix::identity(3)).unwrap();
    let comp = compose_right_solve(&op, &r).unwrap();
    let x = random_matrix(3, 2, 10);
    assert!(max_abs_diff(&comp.apply(&x).unwrap(), &a.mul(&x).unwrap()) < 1e-14);
}

#[test]
fn right_solve_of_itself_is_identity() {
    let r = DenseMatrix::from_rows(&[[2.0, 1.0, -0.5], [0.0, 3.0, 0.25], [0.0, 0.0, 1.5]]);
    let op = DenseOperator::new(r.clone());
    let factor = TriangularFactor::new(r).unwrap();
    let m = materialize(&compose_right_solve(&op, &factor).unwrap()).unwrap();
    assert!(max_abs_diff(&m, &DenseMatrix::identity(3)) < 1e-10);
}

#[test]
fn right_solve_with_qr_factor_orthonormalizes() {
    let a = random_matrix(50, 5, 11);
    // R from nalgebra's QR, independent of the crate's Householder routine
    let r_na = to_na(&a).qr().r();
    let factor = TriangularFactor::new(common::from_na(&r_na)).unwrap();
    let op = DenseOperator::new(a.clone());
    let q = materialize(&compose_right_solve(&op, &factor).unwrap()).unwrap();
    let gram = q.t_mul(&q).unwrap();
    assert!(max_abs_diff(&gram, &DenseMatrix::identity(5)) < 1e-8);
    // the crate's own R agrees with nalgebra's up to row signs
    let ours = householder_r(&a).unwrap();
    for i in 0..5 {
        for j in i..5 {
            assert!((ours.get(i, j).abs() - r_na[(i, j)].abs()).abs() < 1e-10);
        }
    }
}

#[test]
fn right_solve_rejects_singular() {
    let op = DenseOperator::identity(2);
    let r = TriangularFactor::new(DenseMatrix::from_rows(&[[1.0, 1.0], [0.0, 0.0]])).unwrap();
    assert!(r.is_singular());
    assert!(matches!(
        compose_right_solve(&op, &r),
        Err(Error::SingularFactor { index: 1, .. })
    ));
}

#[test]
fn sparse_operator_matches_dense() {
    let trip = [(0, 1, 2.0), (2, 0, -1.0), (1, 3, 0.5), (2, 0, 4.0)];
    let csr = CsrMatrix::from_triplets(3, 4, &trip).unwrap();
    assert_eq!(csr.nnz(), 3);
    let dense = csr.to_dense();
    assert_eq!(dense.get(2, 0), 3.0);
    let op = SparseOperator::new(csr);
    let dop = DenseOperator::new(dense);
    let x = random_matrix(4, 3, 12);
    assert!(max_abs_diff(&op.apply(&x).unwrap(), &dop.apply(&x).unwrap()) < 1e-14);
    let z = random_matrix(3, 2, 13);
    assert!(max_abs_diff(&op.apply_transpose(&z).unwrap(), &dop.apply_transpose(&z).unwrap()) < 1e-14);
    assert_eq!(
        op.queries(),
        QueryCounts {
            forward: 3,
            transpose: 2
        }
    );
}

fn block(rows: usize, cols: usize) -> impl Strategy<Value = DenseMatrix> {
    prop::collection::vec(-10.0f64..10.0, rows * cols)
        .prop_map(move |v| DenseMatrix::from_row_major(rows, cols, v).unwrap())
}

proptest! {
    #[test]
    fn meter_is_additive_over_blocking(widths in prop::collection::vec(1usize..6, 1..6), seed in 0u64..1000) {
        let a = random_matrix(7, 5, seed);
        let op = DenseOperator::new(a);
        let total: usize = widths.iter().sum();
        let whole = random_matrix(5, total, seed + 1);
        let joined = op.apply(&whole).unwrap();
        let before = op.queries();
        let mut start = 0;
        for &w in &widths {
            let piece = DenseMatrix::from_fn(5, w, |i, j| whole.get(i, start + j));
            let out = op.apply(&piece).unwrap();
            for i in 0..7 {
                for j in 0..w {
                    prop_assert_eq!(out.get(i, j), joined.get(i, start + j));
                }
            }
            start += w;
        }
        prop_assert_eq!(before.forward, total);
        prop_assert_eq!(op.queries().forward, 2 * total);
        // one column at a time costs the same
        for j in 0..total {
            op.apply_transpose(&random_matrix(7, 1, j as u64)).unwrap();
        }
        prop_assert_eq!(op.queries().transpose, total);
    }

    #[test]
    fn compositions_are_linear(x in block(6, 2), y in block(6, 2), alpha in -3.0f64..3.0, beta in -3.0f64..3.0) {
        let a = random_matrix(9, 6, 21);
        let op = DenseOperator::new(a.clone());
        let pairs = PairSet::all_pairs(9);
        let factor = TriangularFactor::new(householder_r(&a).unwrap()).unwrap();
        let gram = compose_gram(&op);
        let inc = compose_incidence(&op, &pairs).unwrap();
        let solve = compose_right_solve(&op, &factor).unwrap();
        let ops: [&dyn LinearOperator; 4] = [&op, &gram, &inc, &solve];
        let mut combo = x.clone().scaled(alpha);
        combo.axpy(beta, &y).unwrap();
        for o in ops {
            let mut want = o.apply(&x).unwrap().scaled(alpha);
            want.axpy(beta, &o.apply(&y).unwrap()).unwrap();
            let got = o.apply(&combo).unwrap();
            let scale = 1.0 + want.max_abs();
            prop_assert!(max_abs_diff(&got, &want) <= 1e-12 * scale);
        }
    }

    #[test]
    fn compositions_match_materialized(seed in 0u64..500, rows in 6usize..20, cols in 2usize..6) {
        let a = random_matrix(rows, cols, seed);
        let op = DenseOperator::new(a.clone());
        let x = random_matrix(cols, 3, seed + 7);
        let na = to_na(&a);
        let gram_want = common::from_na(&(na.transpose() * &na * to_na(&x)));
        prop_assert!(rel_diff(&compose_gram(&op).apply(&x).unwrap(), &gram_want) < 1e-10);

        let pairs = PairSet::all_pairs(rows);
        let b = to_na(&pairs.to_incidence_matrix(rows));
        let inc_want = common::from_na(&(b * &na * to_na(&x)));
        prop_assert!(rel_diff(&compose_incidence(&op, &pairs).unwrap().apply(&x).unwrap(), &inc_want) < 1e-10);

        let r = householder_r(&a).unwrap();
        let r_inv = to_na(&r).try_inverse().unwrap();
        let solve_want = common::from_na(&(&na * r_inv * to_na(&x)));
        let factor = TriangularFactor::new(r).unwrap();
        prop_assert!(rel_diff(&compose_right_solve(&op, &factor).unwrap().apply(&x).unwrap(), &solve_want) < 1e-10);
    }
}
