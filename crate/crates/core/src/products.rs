//! Kronecker, semi-tensor and t-products of matrices and tensors.
//!
//! The left semi-tensor product `A ⋉ B` generalizes the ordinary product to
//! operands whose inner dimensions are multiples of one another:
//!
//! ```text
//! A.cols = k·B.rows  =>  A ⋉ B = A · (B ⊗ I_k)
//! B.rows = k·A.cols  =>  A ⋉ B = (A ⊗ I_k) · B
//! ```
//!
//! For tensors the same inflation is applied with the identity tensor `ℐ_k`
//! under the t-product. Both tensor products are evaluated slice-wise in the
//! Fourier domain along mode 3.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::tensor::Tensor3;

/// Matrix Kronecker product; block `(i, j)` of the result is `a_ij · B`.
pub fn kron_mat(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = DenseMatrix::zeros(ar * br, ac * bc);
    for ja in 0..ac {
        for jb in 0..bc {
            let col = out.col_mut(ja * bc + jb);
            for ia in 0..ar {
                let s = a[(ia, ja)];
                let dst = &mut col[ia * br..(ia + 1) * br];
                for (d, &v) in dst.iter_mut().zip(b.col(jb)) {
                    *d = s * v;
                }
            }
        }
    }
    out
}

/// Left semi-tensor product of a row vector `x` (length p) with a column
/// vector `y` (length q).
///
/// If `p = n·q`, `x` is cut into `q` blocks of length `n` and the result is
/// the `1 × n` row `Σ_i y_i · x_i`. If `q = n·p`, `y` is cut into `p` blocks
/// and the result is the `n × 1` column `Σ_i x_i · y_i`.
pub fn stp_vec(x: &[Complex64], y: &[Complex64]) -> Result<DenseMatrix> {
    let (p, q) = (x.len(), y.len());
    if p == 0 || q == 0 {
        return Err(Error::domain("semi-tensor product of empty vectors"));
    }
    if p % q == 0 {
        let n = p / q;
        let mut out = DenseMatrix::zeros(1, n);
        for (block, &yi) in x.chunks_exact(n).zip(y) {
            for (s, &xv) in block.iter().enumerate() {
                out[(0, s)] += xv * yi;
            }
        }
        Ok(out)
    } else if q % p == 0 {
        let n = q / p;
        let mut out = DenseMatrix::zeros(n, 1);
        for (block, &xi) in y.chunks_exact(n).zip(x) {
            for (s, &yv) in block.iter().enumerate() {
                out[(s, 0)] += xi * yv;
            }
        }
        Ok(out)
    } else {
        Err(Error::domain(format!(
            "vector lengths {p} and {q} are not multiples of one another"
        )))
    }
}

/// How the operands of a semi-tensor product are inflated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Inflation {
    /// Equal inner dimensions: ordinary product.
    None,
    /// `A.cols = k·B.rows`: inflate the right operand.
    Right(usize),
    /// `B.rows = k·A.cols`: inflate the left operand.
    Left(usize),
}

fn inflation(left_cols: usize, right_rows: usize) -> Result<Inflation> {
    if left_cols == 0 || right_rows == 0 {
        return Err(Error::domain(
            "semi-tensor product with an empty inner dimension",
        ));
    }
    if left_cols == right_rows {
        Ok(Inflation::None)
    } else if left_cols % right_rows == 0 {
        Ok(Inflation::Right(left_cols / right_rows))
    } else if right_rows % left_cols == 0 {
        Ok(Inflation::Left(right_rows / left_cols))
    } else {
        Err(Error::domain(format!(
            "inner dimensions {left_cols} and {right_rows} are not multiples of one another"
        )))
    }
}

/// Left semi-tensor product of matrices.
pub fn stp_mat(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    match inflation(a.cols(), b.rows())? {
        Inflation::None => a.matmul(b),
        Inflation::Right(k) => a.matmul(&kron_mat(b, &DenseMatrix::identity(k))),
        Inflation::Left(k) => kron_mat(a, &DenseMatrix::identity(k)).matmul(b),
    }
}

/// Tensor Kronecker product. Per mode, indices fuse as `i·extent_B + j`.
pub fn kron_tensor(a: &Tensor3, b: &Tensor3) -> Tensor3 {
    let (a1, a2, a3) = a.dims();
    let (b1, b2, b3) = b.dims();
    let mut out = Tensor3::zeros(a1 * b1, a2 * b2, a3 * b3);
    for ak in 0..a3 {
        for aj in 0..a2 {
            for ai in 0..a1 {
                let s = a.get(ai, aj, ak);
                for bk in 0..b3 {
                    for bj in 0..b2 {
                        for bi in 0..b1 {
                            out.set(
                                ai * b1 + bi,
                                aj * b2 + bj,
                                ak * b3 + bk,
                                s * b.get(bi, bj, bk),
                            );
                        }
                    }
                }
            }
        }
    }
    out
}

/// Applies `op` to matching Fourier-domain slices and transforms back.
fn fourier_slicewise(
    a: &Tensor3,
    b: &Tensor3,
    op: impl Fn(&DenseMatrix, &DenseMatrix) -> Result<DenseMatrix> + Sync,
) -> Result<Tensor3> {
    let ah = a.dft3().slices();
    let bh = b.dft3().slices();
    let prods = ah
        .par_iter()
        .zip(bh.par_iter())
        .map(|(x, y)| op(x, y))
        .collect::<Result<Vec<_>>>()?;
    Ok(Tensor3::from_slices(&prods)?.idft3())
}

/// The t-product `A ∗ B = fold(bcirc(A) · unfold(B))`, evaluated as
/// slice-wise products of the mode-3 DFTs.
pub fn t_product(a: &Tensor3, b: &Tensor3) -> Result<Tensor3> {
    if a.n2() != b.n1() || a.n3() != b.n3() {
        return Err(Error::domain(format!(
            "t-product needs A.n2 = B.n1 and A.n3 = B.n3, got {:?} and {:?}",
            a.dims(),
            b.dims()
        )));
    }
    fourier_slicewise(a, b, |x, y| x.matmul(y))
}

/// Semi-tensor product of tensors with equal third dimension.
pub fn stp_tensor(a: &Tensor3, b: &Tensor3) -> Result<Tensor3> {
    if a.n3() != b.n3() {
        return Err(Error::domain(format!(
            "semi-tensor product needs equal third dimensions, got {} and {}",
            a.n3(),
            b.n3()
        )));
    }
    inflation(a.n2(), b.n1())?;
    fourier_slicewise(a, b, stp_mat)
}
