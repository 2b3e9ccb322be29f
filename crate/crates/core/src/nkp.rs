//! Nearest Kronecker product approximation.
//!
//! For `A` of size `(m1·m2) × (n1·n2)` viewed as an `m1 × n1` grid of
//! `m2 × n2` blocks `A_{i,j}`, the rearrangement `Ã` has one row per block,
//! `vec(A_{i,j})ᵀ`, with blocks enumerated column of blocks first (row index
//! `j·m1 + i`). Under this map `B ⊗ C` becomes the rank-one matrix
//! `vec(B)·vec(C)ᵀ` and Frobenius norms are preserved, so the best `B ⊗ C`
//! comes from the leading singular triplet of `Ã`.

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::spectra;

/// Result of [`nkp`]: `A ≈ B ⊗ C`.
#[derive(Debug, Clone, PartialEq)]
pub struct KronFactors {
    /// `m1 × n1` left factor.
    pub b: DenseMatrix,
    /// `m2 × n2` right factor.
    pub c: DenseMatrix,
    /// `‖A − B ⊗ C‖_F`, taken from the tail of the rearranged spectrum.
    pub residual: f64,
}

pub(crate) fn split_dims(a: &DenseMatrix, m2: usize, n2: usize) -> Result<(usize, usize)> {
    let (m, n) = a.shape();
    if m2 == 0 || m % m2 != 0 {
        return Err(Error::domain(format!(
            "m2 = {m2} does not divide the row count {m}"
        )));
    }
    if n2 == 0 || n % n2 != 0 {
        return Err(Error::domain(format!(
            "n2 = {n2} does not divide the column count {n}"
        )));
    }
    Ok((m / m2, n / n2))
}

/// Builds the `(m1·n1) × (m2·n2)` rearrangement `Ã`.
pub fn rearrange(a: &DenseMatrix, m2: usize, n2: usize) -> Result<DenseMatrix> {
    let (m1, n1) = split_dims(a, m2, n2)?;
    let mut out = DenseMatrix::zeros(m1 * n1, m2 * n2);
    for q in 0..n2 {
        for p in 0..m2 {
            let col = out.col_mut(q * m2 + p);
            for j in 0..n1 {
                let src = a.col(j * n2 + q);
                for i in 0..m1 {
                    col[j * m1 + i] = src[i * m2 + p];
                }
            }
        }
    }
    Ok(out)
}

/// Root-sum-square of `values`.
pub(crate) fn tail_norm(values: &[f64]) -> f64 {
    let scale = values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    scale
        * values
            .iter()
            .map(|v| (v / scale) * (v / scale))
            .sum::<f64>()
            .sqrt()
}

/// Minimizes `‖A − B ⊗ C‖_F` over `B ∈ ℂ^{m1×n1}`, `C ∈ ℂ^{m2×n2}`.
///
/// With `Ã = Σ σ̃_i u_i v_iᴴ`, `vec(B) = √σ̃₁·u₁` and `vec(C) = √σ̃₁·conj(v₁)`
/// (the conjugate because `B ⊗ C` maps to `vec(B)·vec(C)ᵀ`, not `·vec(C)ᴴ`).
/// A zero input gives zero factors.
pub fn nkp(a: &DenseMatrix, m2: usize, n2: usize) -> Result<KronFactors> {
    let (m1, n1) = split_dims(a, m2, n2)?;
    let tilde = rearrange(a, m2, n2)?;
    let s = spectra::svd(&tilde)?;
    let lead = s.sigma[0];
    if lead == 0.0 {
        return Ok(KronFactors {
            b: DenseMatrix::zeros(m1, n1),
            c: DenseMatrix::zeros(m2, n2),
            residual: 0.0,
        });
    }
    let root = lead.sqrt();
    let b = DenseMatrix::from_col_major(m1, n1, s.u.col(0).iter().map(|z| z * root).collect())?;
    let c =
        DenseMatrix::from_col_major(m2, n2, s.v.col(0).iter().map(|z| z.conj() * root).collect())?;
    Ok(KronFactors {
        b,
        c,
        residual: tail_norm(&s.sigma[1..]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::products::kron_mat;
    use num_complex::Complex64;

    #[test]
    fn rearranged_kronecker_is_rank_one() {
        let b = DenseMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let c = DenseMatrix::from_real_rows(&[&[5.0, 6.0], &[7.0, 8.0]]);
        let r = rearrange(&kron_mat(&b, &c), 2, 2).unwrap();
        let vb = [1.0, 3.0, 2.0, 4.0];
        let vc = [5.0, 7.0, 6.0, 8.0];
        let expect = DenseMatrix::from_fn(4, 4, |i, j| Complex64::new(vb[i] * vc[j], 0.0));
        assert_eq!(r, expect);
    }

    #[test]
    fn single_block_is_vec_row() {
        let a = DenseMatrix::from_real_rows(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]]);
        let r = rearrange(&a, 2, 3).unwrap();
        assert_eq!(r.shape(), (1, 6));
        assert_eq!(r.as_slice(), a.as_slice());
    }

    #[test]
    fn unit_blocks_enumerate_block_columns_first() {
        let a = DenseMatrix::from_real_rows(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]]);
        let r = rearrange(&a, 1, 1).unwrap();
        assert_eq!(r.shape(), (6, 1));
        let got: Vec<f64> = r.as_slice().iter().map(|z| z.re).collect();
        // row index j·m1 + i holds A[i, j]
        assert_eq!(got, vec![1.0, 4.0, 2.0, 5.0, 3.0, 6.0]);
    }

    #[test]
    fn rejects_non_divisible_split() {
        let a = DenseMatrix::zeros(6, 4);
        assert!(rearrange(&a, 4, 2).is_err());
        assert!(nkp(&a, 3, 3).is_err());
        assert!(nkp(&a, 0, 2).is_err());
    }

    #[test]
    fn zero_input_gives_zero_factors() {
        let k = nkp(&DenseMatrix::zeros(4, 6), 2, 3).unwrap();
        assert_eq!(k.residual, 0.0);
        assert_eq!(k.b, DenseMatrix::zeros(2, 2));
        assert_eq!(k.c, DenseMatrix::zeros(2, 3));
    }

    #[test]
    fn exact_complex_kronecker_recovered() {
        let b0 = DenseMatrix::from_fn(3, 2, |i, j| Complex64::new(i as f64 + 1.0, j as f64 - 0.5));
        let c0 = DenseMatrix::from_fn(2, 2, |i, j| {
            Complex64::new((i * j) as f64 - 1.0, 0.3 * i as f64)
        });
        let a = kron_mat(&b0, &c0);
        let k = nkp(&a, 2, 2).unwrap();
        let approx = kron_mat(&k.b, &k.c);
        let scale = a.frobenius_norm();
        assert!(k.residual <= 1e-10 * scale);
        assert!(a.sub(&approx).unwrap().frobenius_norm() <= 1e-10 * scale);
    }
}
