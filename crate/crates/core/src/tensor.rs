//! Dense third-order tensors and the layout operators around them.
//!
//! A [`Tensor3`] of shape `n1 × n2 × n3` is stored as `n3` consecutive frontal
//! slices, each an `n1 × n2` column-major matrix. Slice indices are 0-based.

use std::fmt;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::matrix::{frobenius, DenseMatrix};
use crate::products;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, PartialEq)]
pub struct Tensor3 {
    n1: usize,
    n2: usize,
    n3: usize,
    data: Vec<Complex64>,
}

impl Tensor3 {
    pub fn zeros(n1: usize, n2: usize, n3: usize) -> Self {
        assert!(
            n1 > 0 && n2 > 0 && n3 > 0,
            "tensor extents must be positive"
        );
        Self {
            n1,
            n2,
            n3,
            data: vec![ZERO; n1 * n2 * n3],
        }
    }

    pub fn from_fn(
        n1: usize,
        n2: usize,
        n3: usize,
        mut f: impl FnMut(usize, usize, usize) -> Complex64,
    ) -> Self {
        assert!(
            n1 > 0 && n2 > 0 && n3 > 0,
            "tensor extents must be positive"
        );
        let mut data = Vec::with_capacity(n1 * n2 * n3);
        for k in 0..n3 {
            for j in 0..n2 {
                for i in 0..n1 {
                    data.push(f(i, j, k));
                }
            }
        }
        Self { n1, n2, n3, data }
    }

    /// Wraps raw storage (slice-major, column-major within a slice).
    pub fn from_vec(n1: usize, n2: usize, n3: usize, data: Vec<Complex64>) -> Result<Self> {
        if n1 == 0 || n2 == 0 || n3 == 0 {
            return Err(Error::domain("tensor extents must be positive"));
        }
        if data.len() != n1 * n2 * n3 {
            return Err(Error::domain(format!(
                "tensor data has {} entries, expected {n1}x{n2}x{n3}",
                data.len()
            )));
        }
        Ok(Self { n1, n2, n3, data })
    }

    /// Stacks matrices as frontal slices. All slices must share a shape.
    pub fn from_slices(slices: &[DenseMatrix]) -> Result<Self> {
        let first = slices
            .first()
            .ok_or_else(|| Error::domain("at least one slice is required"))?;
        let (n1, n2) = first.shape();
        if slices.iter().any(|s| s.shape() != (n1, n2)) {
            return Err(Error::domain("frontal slices differ in shape"));
        }
        let mut data = Vec::with_capacity(n1 * n2 * slices.len());
        for s in slices {
            data.extend_from_slice(s.as_slice());
        }
        Self::from_vec(n1, n2, slices.len(), data)
    }

    #[inline]
    pub fn n1(&self) -> usize {
        self.n1
    }

    #[inline]
    pub fn n2(&self) -> usize {
        self.n2
    }

    #[inline]
    pub fn n3(&self) -> usize {
        self.n3
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.n1, self.n2, self.n3)
    }

    #[inline]
    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    #[inline]
    fn offset(&self, i: usize, j: usize, k: usize) -> usize {
        debug_assert!(i < self.n1 && j < self.n2 && k < self.n3);
        (k * self.n2 + j) * self.n1 + i
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> Complex64 {
        self.data[self.offset(i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, value: Complex64) {
        let o = self.offset(i, j, k);
        self.data[o] = value;
    }

    #[inline]
    pub(crate) fn slice_data(&self, k: usize) -> &[Complex64] {
        let len = self.n1 * self.n2;
        &self.data[k * len..(k + 1) * len]
    }

    /// Copy of frontal slice `k` (0-based).
    pub fn frontal_slice(&self, k: usize) -> Result<DenseMatrix> {
        if k >= self.n3 {
            return Err(Error::domain(format!(
                "slice index {k} out of range for {} slices",
                self.n3
            )));
        }
        DenseMatrix::from_col_major(self.n1, self.n2, self.slice_data(k).to_vec())
    }

    /// All frontal slices in order.
    pub fn slices(&self) -> Vec<DenseMatrix> {
        (0..self.n3)
            .map(|k| {
                DenseMatrix::from_col_major(self.n1, self.n2, self.slice_data(k).to_vec())
                    .expect("slice length matches")
            })
            .collect()
    }

    /// Stacks the frontal slices vertically into an `(n1·n3) × n2` matrix.
    pub fn unfold(&self) -> DenseMatrix {
        let rows = self.n1 * self.n3;
        DenseMatrix::from_fn(rows, self.n2, |r, j| self.get(r % self.n1, j, r / self.n1))
    }

    /// Inverse of [`Tensor3::unfold`].
    pub fn fold(m: &DenseMatrix, n1: usize, n2: usize, n3: usize) -> Result<Self> {
        if n1 == 0 || n2 == 0 || n3 == 0 {
            return Err(Error::domain("tensor extents must be positive"));
        }
        if m.rows() != n1 * n3 || m.cols() != n2 {
            return Err(Error::domain(format!(
                "cannot fold a {}x{} matrix into {n1}x{n2}x{n3}",
                m.rows(),
                m.cols()
            )));
        }
        Ok(Self::from_fn(n1, n2, n3, |i, j, k| m[(k * n1 + i, j)]))
    }

    /// Block-circulant matrix whose first block column is `unfold(self)`.
    /// Block `(p, q)` is slice `(p − q) mod n3`.
    pub fn bcirc(&self) -> DenseMatrix {
        let (n1, n2, n3) = self.dims();
        let mut out = DenseMatrix::zeros(n1 * n3, n2 * n3);
        for q in 0..n3 {
            for p in 0..n3 {
                let k = (p + n3 - q) % n3;
                for j in 0..n2 {
                    let src = &self.slice_data(k)[j * n1..(j + 1) * n1];
                    let col = out.col_mut(q * n2 + j);
                    col[p * n1..(p + 1) * n1].copy_from_slice(src);
                }
            }
        }
        out
    }

    /// Extracts the first block column of a block-circulant matrix. The
    /// circulant structure of `m` is not checked.
    pub fn bcirc_inv(m: &DenseMatrix, n1: usize, n2: usize, n3: usize) -> Result<DenseMatrix> {
        if m.rows() != n1 * n3 || m.cols() != n2 * n3 {
            return Err(Error::domain(format!(
                "expected a {}x{} block-circulant matrix, got {}x{}",
                n1 * n3,
                n2 * n3,
                m.rows(),
                m.cols()
            )));
        }
        Ok(m.leading_cols(n2))
    }

    /// Unnormalized forward DFT along every tube `A(i, j, :)`.
    pub fn dft3(&self) -> Tensor3 {
        self.transform_tubes(false)
    }

    /// Inverse of [`Tensor3::dft3`], scaled by `1/n3`.
    pub fn idft3(&self) -> Tensor3 {
        self.transform_tubes(true)
    }

    fn transform_tubes(&self, inverse: bool) -> Tensor3 {
        let n3 = self.n3;
        if n3 == 1 {
            return self.clone();
        }
        let mut planner = FftPlanner::<f64>::new();
        let fft = if inverse {
            planner.plan_fft_inverse(n3)
        } else {
            planner.plan_fft_forward(n3)
        };
        let stride = self.n1 * self.n2;
        let mut out = self.clone();
        let mut tube = vec![ZERO; n3];
        let mut scratch = vec![ZERO; fft.get_inplace_scratch_len()];
        let scale = 1.0 / n3 as f64;
        for t in 0..stride {
            for (k, v) in tube.iter_mut().enumerate() {
                *v = self.data[k * stride + t];
            }
            fft.process_with_scratch(&mut tube, &mut scratch);
            for (k, &v) in tube.iter().enumerate() {
                out.data[k * stride + t] = if inverse { v * scale } else { v };
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        frobenius(&self.data)
    }

    /// Conjugate transpose: slice 0 becomes `A₀ᴴ`, slice `k ≥ 1` becomes `A_{n3−k}ᴴ`.
    pub fn conj_transpose(&self) -> Tensor3 {
        self.transpose_with(|z| z.conj())
    }

    /// Transpose with the same slice reversal as [`Tensor3::conj_transpose`]
    /// but without conjugation.
    pub fn transpose(&self) -> Tensor3 {
        self.transpose_with(|z| z)
    }

    fn transpose_with(&self, f: impl Fn(Complex64) -> Complex64) -> Tensor3 {
        let n3 = self.n3;
        Tensor3::from_fn(self.n2, self.n1, n3, |i, j, k| {
            let src = (n3 - k) % n3;
            f(self.get(j, i, src))
        })
    }

    /// `ℐ`: first frontal slice `I_n`, remaining slices zero.
    pub fn identity(n: usize, n3: usize) -> Tensor3 {
        let mut t = Tensor3::zeros(n, n, n3);
        for i in 0..n {
            t.set(i, i, 0, Complex64::new(1.0, 0.0));
        }
        t
    }

    /// True iff every off-diagonal entry of every slice has modulus ≤ `tol`.
    pub fn is_f_diagonal(&self, tol: f64) -> bool {
        (0..self.n3).all(|k| {
            (0..self.n2).all(|j| (0..self.n1).all(|i| i == j || self.get(i, j, k).norm() <= tol))
        })
    }

    /// True iff `U ∗ Uᴴ` and `Uᴴ ∗ U` are both within `tol` (Frobenius) of `ℐ`.
    pub fn is_unitary(&self, tol: f64) -> Result<bool> {
        if self.n1 != self.n2 {
            return Err(Error::domain(format!(
                "unitarity needs square slices, got {}x{}",
                self.n1, self.n2
            )));
        }
        let id = Tensor3::identity(self.n1, self.n3);
        let h = self.conj_transpose();
        let left = products::t_product(self, &h)?;
        let right = products::t_product(&h, self)?;
        Ok(left.sub(&id)?.frobenius_norm() <= tol && right.sub(&id)?.frobenius_norm() <= tol)
    }

    pub fn sub(&self, other: &Tensor3) -> Result<Tensor3> {
        if self.dims() != other.dims() {
            return Err(Error::domain(format!(
                "shape mismatch: {:?} vs {:?}",
                self.dims(),
                other.dims()
            )));
        }
        Ok(Tensor3 {
            n1: self.n1,
            n2: self.n2,
            n3: self.n3,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn scale(&self, alpha: Complex64) -> Tensor3 {
        Tensor3 {
            n1: self.n1,
            n2: self.n2,
            n3: self.n3,
            data: self.data.iter().map(|&z| z * alpha).collect(),
        }
    }

    /// Largest imaginary-part magnitude over all entries.
    pub fn max_imag(&self) -> f64 {
        self.data.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    /// Drops imaginary parts. Returns the largest magnitude discarded.
    pub fn discard_imag(&mut self) -> f64 {
        let mut worst = 0.0f64;
        for z in &mut self.data {
            worst = worst.max(z.im.abs());
            z.im = 0.0;
        }
        worst
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl fmt::Debug for Tensor3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Tensor3 {}x{}x{} {{", self.n1, self.n2, self.n3)?;
        for s in self.slices() {
            writeln!(f, "{s:?}")?;
        }
        write!(f, "}}")
    }
}
