mod common;

use common::*;
use rand::Rng;
use stpz_core::spectra::{svd, svd_full, svds};
use stpz_core::{Complex64, DenseMatrix};

fn orthonormality_defect(q: &DenseMatrix) -> f64 {
    let g = q.adjoint().matmul(q).unwrap();
    g.sub(&DenseMatrix::identity(q.cols()))
        .unwrap()
        .frobenius_norm()
}

#[test]
fn singular_values_match_gram_eigenvalues() {
    let mut r = rng(41);
    for _ in 0..60 {
        let (m, n) = (r.random_range(1..=9), r.random_range(1..=9));
        let a = rand_mat(&mut r, m, n);
        let s = svd(&a).unwrap();
        let want = singular_values_oracle(&a);
        assert_eq!(s.sigma.len(), m.min(n));
        let scale = want[0].max(1.0);
        for (got, want) in s.sigma.iter().zip(&want) {
            assert!((got - want).abs() <= 1e-9 * scale, "{got} vs {want}");
        }
    }
}

#[test]
fn factors_are_orthonormal_and_reconstruct() {
    let mut r = rng(42);
    for _ in 0..60 {
        let (m, n) = (r.random_range(1..=10), r.random_range(1..=10));
        let a = rand_mat(&mut r, m, n);
        let s = svd(&a).unwrap();
        assert!(orthonormality_defect(&s.u) <= 1e-12);
        assert!(orthonormality_defect(&s.v) <= 1e-12);
        assert!(s.sigma.windows(2).all(|w| w[0] >= w[1]));
        assert!(rel_err_mat(&s.reconstruct(), &a) <= 1e-12);
    }
}

#[test]
fn full_factors_are_square_unitary() {
    let mut r = rng(43);
    for _ in 0..30 {
        let (m, n) = (r.random_range(1..=8), r.random_range(1..=8));
        let a = rand_mat(&mut r, m, n);
        let f = svd_full(&a).unwrap();
        assert_eq!(f.u.shape(), (m, m));
        assert_eq!(f.v.shape(), (n, n));
        assert!(orthonormality_defect(&f.u) <= 1e-12);
        assert!(orthonormality_defect(&f.v) <= 1e-12);
    }
}

#[test]
fn truncation_residual_is_tail_norm() {
    let mut r = rng(44);
    for _ in 0..40 {
        let (m, n) = (r.random_range(2..=9), r.random_range(2..=9));
        let a = rand_mat(&mut r, m, n);
        let all = svd(&a).unwrap().sigma;
        for k in 1..=m.min(n) {
            let t = svds(&a, k).unwrap();
            let resid = a.sub(&t.reconstruct()).unwrap().frobenius_norm();
            let tail = rss(&all[k..]);
            assert!((resid - tail).abs() <= 1e-10 * a.frobenius_norm());
        }
    }
}

#[test]
fn truncation_beats_random_low_rank() {
    let mut r = rng(45);
    for _ in 0..10 {
        let (m, n) = (r.random_range(3..=8), r.random_range(3..=8));
        let a = rand_mat(&mut r, m, n);
        for k in 1..m.min(n) {
            let best = a
                .sub(&svds(&a, k).unwrap().reconstruct())
                .unwrap()
                .frobenius_norm();
            for _ in 0..20 {
                let x = rand_mat(&mut r, m, k);
                let y = rand_mat(&mut r, k, n);
                // Least-squares scale of X·Y toward A makes the competitor less trivial.
                let p = x.matmul(&y).unwrap();
                let num: Complex64 = p
                    .as_slice()
                    .iter()
                    .zip(a.as_slice())
                    .map(|(u, v)| u.conj() * v)
                    .sum();
                let den: f64 = p.as_slice().iter().map(|z| z.norm_sqr()).sum();
                let cand = p.scale(num / den);
                let err = a.sub(&cand).unwrap().frobenius_norm();
                assert!(best <= err + 1e-12);
            }
        }
    }
}

#[test]
fn rank_deficient_and_real_inputs() {
    let mut r = rng(46);
    let x = rand_real_mat(&mut r, 7, 2);
    let y = rand_real_mat(&mut r, 2, 5);
    let a = x.matmul(&y).unwrap();
    let s = svd(&a).unwrap();
    assert!(s.sigma[2..].iter().all(|&v| v <= 1e-12 * s.sigma[0]));
    assert_eq!(s.rank(), 5);
    assert!(rel_err_mat(&s.reconstruct(), &a) <= 1e-12);
}

#[test]
fn deterministic_across_calls() {
    let mut r = rng(47);
    let a = rand_mat(&mut r, 6, 4);
    assert_eq!(svd(&a).unwrap(), svd(&a).unwrap());
}

#[test]
fn svds_rejects_bad_rank() {
    let a = DenseMatrix::identity(3);
    assert!(svds(&a, 0).is_err());
    assert!(svds(&a, 4).is_err());
}
