//! STP-SVD of matrices and third-order tensors, the t-SVD baseline, and the
//! associated error bounds.
//!
//! # Matrix STP-SVD
//!
//! Given `A ∈ ℂ^{(m1·m2)×(n1·n2)}`, first approximate `A ≈ B ⊗ C` with the
//! nearest Kronecker product, then take the SVD `B = U·Σ_B·Vᴴ`. By the mixed
//! product rule
//!
//! ```text
//! B ⊗ C = (U ⊗ I_m2)(Σ_B ⊗ C)(Vᴴ ⊗ I_n2) = U ⋉ Σ ⋉ Vᴴ
//! ```
//!
//! where `Σ = Σ_B ⊗ C` is block diagonal with blocks `S_i = σ_i·C`. Only
//! `U`, `σ`, `C` and `V` are stored. Truncating to `r` blocks keeps the
//! leading `r` singular triplets of `B`.
//!
//! # Tensor STP-SVD
//!
//! The matrix decomposition is applied to every frontal slice of the mode-3
//! DFT `Â`. Factors stay in the Fourier domain; [`TensorStpSvd::reconstruct`]
//! rebuilds each slice and applies a single inverse DFT.
//!
//! # Scaling
//!
//! The forward DFT is unnormalized, so `‖A‖_F² = (1/l)·Σ_i ‖Â_i‖_F²`. Every
//! aggregation of Fourier-slice errors into a spatial-domain error carries
//! the `1/√l` factor.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::nkp::{self, tail_norm};
use crate::products::{kron_mat, t_product};
use crate::spectra;
use crate::tensor::Tensor3;

/// Block split of a matrix: `(m1·m2) × (n1·n2)` with `m2 × n2` blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SplitDims {
    pub m1: usize,
    pub m2: usize,
    pub n1: usize,
    pub n2: usize,
}

impl SplitDims {
    /// Splits an `m × n` shape with `m2 × n2` blocks.
    pub fn new(m: usize, n: usize, m2: usize, n2: usize) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::domain("cannot split an empty shape"));
        }
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
        Ok(Self {
            m1: m / m2,
            m2,
            n1: n / n2,
            n2,
        })
    }

    pub fn rows(&self) -> usize {
        self.m1 * self.m2
    }

    pub fn cols(&self) -> usize {
        self.n1 * self.n2
    }

    /// Number of diagonal blocks in the untruncated middle factor, `min(m1, n1)`.
    pub fn max_rank(&self) -> usize {
        self.m1.min(self.n1)
    }

    fn check_rank(&self, r: usize) -> Result<()> {
        if r == 0 || r > self.max_rank() {
            return Err(Error::domain(format!(
                "block rank {r} outside 1..={} (m1 = {}, n1 = {})",
                self.max_rank(),
                self.m1,
                self.n1
            )));
        }
        Ok(())
    }
}

/// Per-slice count of retained diagonal blocks.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BlockRank(Vec<usize>);

impl BlockRank {
    pub fn new(ranks: Vec<usize>) -> Result<Self> {
        if ranks.is_empty() {
            return Err(Error::domain("block rank needs at least one entry"));
        }
        if ranks.contains(&0) {
            return Err(Error::domain("block rank entries must be positive"));
        }
        Ok(Self(ranks))
    }

    pub fn uniform(r: usize, l: usize) -> Result<Self> {
        Self::new(vec![r; l])
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max(&self) -> usize {
        self.0.iter().copied().max().unwrap_or(0)
    }

    fn check(&self, l: usize, max_rank: usize) -> Result<()> {
        if self.0.len() != l {
            return Err(Error::domain(format!(
                "block rank has {} entries but the tensor has {l} slices",
                self.0.len()
            )));
        }
        if let Some(&bad) = self.0.iter().find(|&&r| r > max_rank) {
            return Err(Error::domain(format!(
                "block rank entry {bad} exceeds the maximum {max_rank}"
            )));
        }
        Ok(())
    }
}

/// Matrix STP-SVD factors `A ≈ U ⋉ (diag(σ) ⊗ C) ⋉ Vᴴ`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatStpSvd {
    /// `m1 × r`, orthonormal columns.
    pub u: DenseMatrix,
    /// Descending, length `r`.
    pub sigma: Vec<f64>,
    /// `m2 × n2` Kronecker factor shared by every block.
    pub c: DenseMatrix,
    /// `n1 × r`, orthonormal columns.
    pub v: DenseMatrix,
    pub dims: SplitDims,
}

impl MatStpSvd {
    fn zero(dims: SplitDims, r: usize) -> Self {
        Self {
            u: DenseMatrix::zeros(dims.m1, r),
            sigma: vec![0.0; r],
            c: DenseMatrix::zeros(dims.m2, dims.n2),
            v: DenseMatrix::zeros(dims.n1, r),
            dims,
        }
    }

    /// Number of retained diagonal blocks.
    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    /// `‖S_i‖_F = σ_i·‖C‖_F`, non-increasing.
    pub fn block_norms(&self) -> Vec<f64> {
        let cn = self.c.frobenius_norm();
        self.sigma.iter().map(|&s| s * cn).collect()
    }

    /// The block-diagonal middle factor `diag(σ) ⊗ C`, size `(r·m2) × (r·n2)`.
    pub fn middle(&self) -> DenseMatrix {
        kron_mat(&DenseMatrix::diag_real(&self.sigma), &self.c)
    }

    /// `U·diag(σ)·Vᴴ`, the rank-`r` approximation of the Kronecker factor `B`.
    pub fn b_approx(&self) -> DenseMatrix {
        let mut us = self.u.clone();
        for (j, &s) in self.sigma.iter().enumerate() {
            for z in us.col_mut(j) {
                *z *= s;
            }
        }
        us.matmul(&self.v.adjoint())
            .expect("factor shapes are consistent")
    }

    /// `(U ⊗ I_m2)(diag(σ) ⊗ C)(Vᴴ ⊗ I_n2)`, evaluated as `(U·diag(σ)·Vᴴ) ⊗ C`.
    pub fn reconstruct(&self) -> DenseMatrix {
        kron_mat(&self.b_approx(), &self.c)
    }
}

/// Untruncated matrix STP-SVD (`r = min(m1, n1)`).
pub fn mat_stp_svd(a: &DenseMatrix, m2: usize, n2: usize) -> Result<MatStpSvd> {
    let dims = SplitDims::new(a.rows(), a.cols(), m2, n2)?;
    stp_svd_with_dims(a, dims, dims.max_rank())
}

/// Matrix STP-SVD keeping the leading `r` blocks.
pub fn mat_stp_svd_trunc(a: &DenseMatrix, m2: usize, n2: usize, r: usize) -> Result<MatStpSvd> {
    let dims = SplitDims::new(a.rows(), a.cols(), m2, n2)?;
    dims.check_rank(r)?;
    stp_svd_with_dims(a, dims, r)
}

fn stp_svd_with_dims(a: &DenseMatrix, dims: SplitDims, r: usize) -> Result<MatStpSvd> {
    let k = nkp::nkp(a, dims.m2, dims.n2)?;
    if k.b.max_abs() == 0.0 {
        return Ok(MatStpSvd::zero(dims, r));
    }
    let s = spectra::svds(&k.b, r)?;
    Ok(MatStpSvd {
        u: s.u,
        sigma: s.sigma,
        c: k.c,
        v: s.v,
        dims,
    })
}

/// Tensor STP-SVD with factors held per Fourier slice.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorStpSvd {
    /// Matrix STP-SVD of each slice of the mode-3 DFT, in slice order.
    pub slices: Vec<MatStpSvd>,
    pub dims: SplitDims,
    pub block_rank: BlockRank,
    /// Whether the decomposed tensor was real.
    pub real_input: bool,
}

impl TensorStpSvd {
    /// Assembles factors, checking that they agree with `dims` and each other.
    pub fn from_parts(slices: Vec<MatStpSvd>, dims: SplitDims, real_input: bool) -> Result<Self> {
        let mut ranks = Vec::with_capacity(slices.len());
        for (i, s) in slices.iter().enumerate() {
            let r = s.sigma.len();
            let ok = s.dims == dims
                && s.u.shape() == (dims.m1, r)
                && s.v.shape() == (dims.n1, r)
                && s.c.shape() == (dims.m2, dims.n2);
            if !ok {
                return Err(Error::domain(format!(
                    "slice {i} factors disagree with {dims:?}"
                )));
            }
            dims.check_rank(r)?;
            ranks.push(r);
        }
        Ok(Self {
            slices,
            dims,
            block_rank: BlockRank::new(ranks)?,
            real_input,
        })
    }

    /// Number of frontal slices `l`.
    pub fn l(&self) -> usize {
        self.slices.len()
    }

    /// Reconstructed tensor, `(m1·m2) × (n1·n2) × l`. For real input the
    /// imaginary parts are rounding residue; see [`Tensor3::discard_imag`].
    pub fn reconstruct(&self) -> Tensor3 {
        let hat: Vec<DenseMatrix> = self.slices.par_iter().map(MatStpSvd::reconstruct).collect();
        Tensor3::from_slices(&hat)
            .expect("slices share a shape")
            .idft3()
    }
}

/// Untruncated tensor STP-SVD.
pub fn tensor_stp_svd(a: &Tensor3, m2: usize, n2: usize) -> Result<TensorStpSvd> {
    let dims = SplitDims::new(a.n1(), a.n2(), m2, n2)?;
    let ranks = BlockRank::uniform(dims.max_rank(), a.n3())?;
    decompose_tensor(a, dims, &ranks)
}

/// Tensor STP-SVD keeping `ranks[i]` blocks in Fourier slice `i`.
pub fn tensor_stp_svd_trunc(
    a: &Tensor3,
    m2: usize,
    n2: usize,
    ranks: &BlockRank,
) -> Result<TensorStpSvd> {
    let dims = SplitDims::new(a.n1(), a.n2(), m2, n2)?;
    ranks.check(a.n3(), dims.max_rank())?;
    decompose_tensor(a, dims, ranks)
}

fn decompose_tensor(a: &Tensor3, dims: SplitDims, ranks: &BlockRank) -> Result<TensorStpSvd> {
    let hat = a.dft3().slices();
    let slices = hat
        .par_iter()
        .zip(ranks.as_slice().par_iter())
        .map(|(s, &r)| stp_svd_with_dims(s, dims, r))
        .collect::<Result<Vec<_>>>()?;
    Ok(TensorStpSvd {
        slices,
        dims,
        block_rank: ranks.clone(),
        real_input: a.is_real(),
    })
}

/// Spatial-domain t-SVD factors `A ≈ U ∗ S ∗ Vᴴ`.
#[derive(Debug, Clone, PartialEq)]
pub struct TSvdFactors {
    pub u: Tensor3,
    /// f-diagonal.
    pub s: Tensor3,
    pub v: Tensor3,
}

impl TSvdFactors {
    pub fn reconstruct(&self) -> Tensor3 {
        let us = t_product(&self.u, &self.s).expect("factor shapes are consistent");
        t_product(&us, &self.v.conj_transpose()).expect("factor shapes are consistent")
    }
}

/// Full t-SVD: `U` is `n1×n1×n3`, `S` is `n1×n2×n3`, `V` is `n2×n2×n3`.
pub fn t_svd(a: &Tensor3) -> Result<TSvdFactors> {
    let (n1, n2, _) = a.dims();
    let hat = a.dft3().slices();
    let parts = hat
        .par_iter()
        .map(|s| {
            let f = spectra::svd_full(s)?;
            let mut sigma = DenseMatrix::zeros(n1, n2);
            for (i, &x) in f.sigma.iter().enumerate() {
                sigma[(i, i)] = Complex64::new(x, 0.0);
            }
            Ok((f.u, sigma, f.v))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble_tsvd(parts))
}

/// t-SVD truncated at rank `ranks[i]` in Fourier slice `i`. Factors are
/// padded with zeros to the largest rank: `U` is `n1×R×n3`, `S` is
/// `R×R×n3`, `V` is `n2×R×n3` with `R = max(ranks)`.
pub fn t_svd_trunc(a: &Tensor3, ranks: &BlockRank) -> Result<TSvdFactors> {
    let (n1, n2, n3) = a.dims();
    ranks.check(n3, n1.min(n2))?;
    let rmax = ranks.max();
    let hat = a.dft3().slices();
    let parts = hat
        .par_iter()
        .zip(ranks.as_slice().par_iter())
        .map(|(s, &r)| {
            let f = spectra::svds(s, r)?;
            let mut u = DenseMatrix::zeros(n1, rmax);
            let mut v = DenseMatrix::zeros(n2, rmax);
            let mut sigma = DenseMatrix::zeros(rmax, rmax);
            u.set_block(0, 0, &f.u);
            v.set_block(0, 0, &f.v);
            for (i, &x) in f.sigma.iter().enumerate() {
                sigma[(i, i)] = Complex64::new(x, 0.0);
            }
            Ok((u, sigma, v))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble_tsvd(parts))
}

fn assemble_tsvd(parts: Vec<(DenseMatrix, DenseMatrix, DenseMatrix)>) -> TSvdFactors {
    let mut us = Vec::with_capacity(parts.len());
    let mut ss = Vec::with_capacity(parts.len());
    let mut vs = Vec::with_capacity(parts.len());
    for (u, s, v) in parts {
        us.push(u);
        ss.push(s);
        vs.push(v);
    }
    let back = |m: &[DenseMatrix]| {
        Tensor3::from_slices(m)
            .expect("slices share a shape")
            .idft3()
    };
    TSvdFactors {
        u: back(&us),
        s: back(&ss),
        v: back(&vs),
    }
}

/// Error bound for truncated matrix STP-SVD.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorBound {
    /// Kronecker step error `√(Σ_{i≥2} σ̃_i²)`.
    pub e1: f64,
    /// Truncation error `√(Σ_{j>r} ‖S_j‖_F²)`.
    pub e2: f64,
    /// `e1 + e2`.
    pub total: f64,
}

/// Bound on `‖A − U ⋉ Σ ⋉ Vᴴ‖_F` for the rank-`r` matrix STP-SVD.
pub fn error_bound_matrix(a: &DenseMatrix, m2: usize, n2: usize, r: usize) -> Result<ErrorBound> {
    let dims = SplitDims::new(a.rows(), a.cols(), m2, n2)?;
    dims.check_rank(r)?;
    bound_with_dims(a, dims, r)
}

fn bound_with_dims(a: &DenseMatrix, dims: SplitDims, r: usize) -> Result<ErrorBound> {
    let k = nkp::nkp(a, dims.m2, dims.n2)?;
    let sigma = spectra::svd(&k.b)?.sigma;
    let cn = k.c.frobenius_norm();
    let block_norms: Vec<f64> = sigma[r..].iter().map(|&s| s * cn).collect();
    let e1 = k.residual;
    let e2 = tail_norm(&block_norms);
    Ok(ErrorBound {
        e1,
        e2,
        total: e1 + e2,
    })
}

/// Bound on the spatial-domain error of the truncated tensor STP-SVD: the
/// sum of per-Fourier-slice matrix bounds, times `1/√l`.
pub fn error_bound_tensor(a: &Tensor3, m2: usize, n2: usize, ranks: &BlockRank) -> Result<f64> {
    let dims = SplitDims::new(a.n1(), a.n2(), m2, n2)?;
    ranks.check(a.n3(), dims.max_rank())?;
    let hat = a.dft3().slices();
    let bounds = hat
        .par_iter()
        .zip(ranks.as_slice().par_iter())
        .map(|(s, &r)| bound_with_dims(s, dims, r))
        .collect::<Result<Vec<_>>>()?;
    let sum: f64 = bounds.iter().map(|b| b.total).sum();
    Ok(sum / (a.n3() as f64).sqrt())
}
