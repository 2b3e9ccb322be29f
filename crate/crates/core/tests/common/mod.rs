//! Random generators and independent reference implementations shared by the
//! integration tests. Nothing here calls the decomposition code it checks.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stpz_core::{Complex64, DenseMatrix, Tensor3};

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn cplx(rng: &mut TestRng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn rand_mat(rng: &mut TestRng, rows: usize, cols: usize) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| cplx(rng))
}

pub fn rand_real_mat(rng: &mut TestRng, rows: usize, cols: usize) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), 0.0)
    })
}

pub fn rand_tensor(rng: &mut TestRng, n1: usize, n2: usize, n3: usize) -> Tensor3 {
    Tensor3::from_fn(n1, n2, n3, |_, _, _| cplx(rng))
}

pub fn rand_real_tensor(rng: &mut TestRng, n1: usize, n2: usize, n3: usize) -> Tensor3 {
    Tensor3::from_fn(n1, n2, n3, |_, _, _| {
        Complex64::new(rng.random_range(-1.0..1.0), 0.0)
    })
}

pub fn rel_err_mat(got: &DenseMatrix, want: &DenseMatrix) -> f64 {
    assert_eq!(got.shape(), want.shape(), "shape mismatch");
    let d = got.sub(want).unwrap().frobenius_norm();
    let s = want.frobenius_norm();
    if s == 0.0 {
        d
    } else {
        d / s
    }
}

pub fn rel_err_tensor(got: &Tensor3, want: &Tensor3) -> f64 {
    assert_eq!(got.dims(), want.dims(), "shape mismatch");
    let d = got.sub(want).unwrap().frobenius_norm();
    let s = want.frobenius_norm();
    if s == 0.0 {
        d
    } else {
        d / s
    }
}

/// Picks two or three sizes that are pairwise multiples of one another,
/// drawn from either {1, 2, 4} or {1, 3, 6}.
pub fn chain_dims(rng: &mut TestRng, count: usize) -> Vec<usize> {
    let family: [usize; 3] = if rng.random_bool(0.5) {
        [1, 2, 4]
    } else {
        [1, 3, 6]
    };
    (0..count).map(|_| family[rng.random_range(0..3)]).collect()
}

/// Left semi-tensor product straight from its blockwise definition: block
/// `(i, j)` of the result is the vector product of row `i` of `a` with
/// column `j` of `b`, each split into equal-length pieces.
pub fn stp_blockwise(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let (m, n) = a.shape();
    let (s, t) = b.shape();
    if n >= s {
        assert_eq!(n % s, 0);
        let k = n / s;
        let mut d = DenseMatrix::zeros(m, k * t);
        for i in 0..m {
            for j in 0..t {
                for piece in 0..s {
                    for x in 0..k {
                        d[(i, j * k + x)] += a[(i, piece * k + x)] * b[(piece, j)];
                    }
                }
            }
        }
        d
    } else {
        assert_eq!(s % n, 0);
        let k = s / n;
        let mut d = DenseMatrix::zeros(k * m, t);
        for i in 0..m {
            for j in 0..t {
                for piece in 0..n {
                    for x in 0..k {
                        d[(i * k + x, j)] += a[(i, piece)] * b[(piece * k + x, j)];
                    }
                }
            }
        }
        d
    }
}

/// Entry-wise matrix Kronecker product.
pub fn kron_naive(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let (br, bc) = b.shape();
    DenseMatrix::from_fn(a.rows() * br, a.cols() * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

/// Naive matrix product by triple loop.
pub fn matmul_naive(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    assert_eq!(a.cols(), b.rows());
    DenseMatrix::from_fn(a.rows(), b.cols(), |i, j| {
        (0..a.cols()).map(|k| a[(i, k)] * b[(k, j)]).sum()
    })
}

/// Block-circulant matrix from modular index arithmetic on tensor entries.
pub fn bcirc_naive(a: &Tensor3) -> DenseMatrix {
    let (n1, n2, n3) = a.dims();
    DenseMatrix::from_fn(n1 * n3, n2 * n3, |r, c| {
        let (p, i) = (r / n1, r % n1);
        let (q, j) = (c / n2, c % n2);
        a.get(i, j, (p + n3 - q) % n3)
    })
}

/// Stacks frontal slices vertically by direct indexing.
pub fn unfold_naive(a: &Tensor3) -> DenseMatrix {
    let (n1, n2, _) = a.dims();
    DenseMatrix::from_fn(a.n1() * a.n3(), n2, |r, j| a.get(r % n1, j, r / n1))
}

pub fn fold_naive(m: &DenseMatrix, n1: usize, n2: usize, n3: usize) -> Tensor3 {
    Tensor3::from_fn(n1, n2, n3, |i, j, k| m[(k * n1 + i, j)])
}

/// t-product from the block-circulant definition.
pub fn t_product_definitional(a: &Tensor3, b: &Tensor3) -> Tensor3 {
    let prod = matmul_naive(&bcirc_naive(a), &unfold_naive(b));
    fold_naive(&prod, a.n1(), b.n2(), a.n3())
}

/// Tensor semi-tensor product as `fold[bcirc(A) ⋉ unfold(B)]`.
pub fn stp_tensor_definitional(a: &Tensor3, b: &Tensor3) -> Tensor3 {
    let prod = stp_blockwise(&bcirc_naive(a), &unfold_naive(b));
    let n3 = a.n3();
    fold_naive(&prod, prod.rows() / n3, prod.cols(), n3)
}

/// The `n × n` DFT matrix with entries `exp(−2πi·jk/n)`.
pub fn dft_matrix(n: usize) -> DenseMatrix {
    DenseMatrix::from_fn(n, n, |j, k| {
        let theta = -2.0 * std::f64::consts::PI * ((j * k) % n) as f64 / n as f64;
        Complex64::new(theta.cos(), theta.sin())
    })
}

/// Mode-3 DFT by direct summation.
pub fn dft3_naive(a: &Tensor3) -> Tensor3 {
    let n3 = a.n3();
    let f = dft_matrix(n3);
    Tensor3::from_fn(a.n1(), a.n2(), n3, |i, j, k| {
        (0..n3).map(|t| f[(k, t)] * a.get(i, j, t)).sum()
    })
}

/// Eigenvalues of a Hermitian matrix by cyclic complex Jacobi rotations.
pub fn hermitian_eigenvalues(h: &DenseMatrix) -> Vec<f64> {
    let n = h.rows();
    let mut a = h.clone();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|(i, j)| i != j)
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum();
        if off.sqrt() <= 1e-15 * a.frobenius_norm().max(1e-300) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                // Rotation zeroing a_pq: phase e = a_pq/|a_pq|, angle from the 2x2 real problem.
                let e = apq / mag;
                let tau = (aqq - app) / (2.0 * mag);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let t = if tau == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // J = [[c, s·e], [−s·conj(e), c]] acting on columns p, q; A ← Jᴴ A J.
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c - akq * s * e.conj();
                    a[(k, q)] = akp * s * e + akq * c;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c - aqk * s * e;
                    a[(q, k)] = apk * s * e.conj() + aqk * c;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    ev
}

/// Singular values as square roots of the eigenvalues of `AᴴA` (or `AAᴴ`).
pub fn singular_values_oracle(a: &DenseMatrix) -> Vec<f64> {
    let gram = if a.rows() >= a.cols() {
        matmul_naive(&a.adjoint(), a)
    } else {
        matmul_naive(a, &a.adjoint())
    };
    hermitian_eigenvalues(&gram)
        .into_iter()
        .map(|l| l.max(0.0).sqrt())
        .collect()
}

/// Root-sum-square.
pub fn rss(values: &[f64]) -> f64 {
    values.iter().map(|v| v * v).sum::<f64>().sqrt()
}
