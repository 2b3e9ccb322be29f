//! Dense singular value decomposition.
//!
//! The kernel is Golub–Kahan–Reinsch: Householder reduction of the complex
//! input to a *real* upper-bidiagonal matrix (the reflectors are chosen so the
//! bidiagonal entries come out real), followed by implicit-shift QR sweeps on
//! the bidiagonal with the Givens rotations accumulated into the complex
//! left and right factors.
//!
//! Output is normalized so that repeated calls agree bit for bit: singular
//! values are sorted descending (stable on ties) and every left singular
//! vector is rotated so that its largest-modulus entry (lowest row on ties) is
//! real and positive. The matching right vector gets the same phase, which
//! leaves `u σ vᴴ` unchanged.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{frobenius, DenseMatrix};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Off-diagonal entries below this fraction of `‖A‖_F` count as zero.
const CONVERGENCE_TOL: f64 = 1e-14;

/// Budget of QR steps per singular value.
const MAX_SWEEPS_PER_VALUE: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct SvdResult {
    /// Left singular vectors as columns.
    pub u: DenseMatrix,
    /// Singular values, descending.
    pub sigma: Vec<f64>,
    /// Right singular vectors as columns.
    pub v: DenseMatrix,
}

impl SvdResult {
    /// Number of singular triplets.
    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    /// `U · diag(σ) · Vᴴ` over the stored triplets.
    pub fn reconstruct(&self) -> DenseMatrix {
        let r = self.sigma.len();
        let mut us = self.u.leading_cols(r);
        for (j, &s) in self.sigma.iter().enumerate() {
            for z in us.col_mut(j) {
                *z *= s;
            }
        }
        us.matmul(&self.v.leading_cols(r).adjoint())
            .expect("factor shapes are consistent")
    }

    /// Keeps the leading `r` triplets.
    pub fn truncate(mut self, r: usize) -> SvdResult {
        let r = r.min(self.sigma.len());
        self.sigma.truncate(r);
        self.u = self.u.leading_cols(r);
        self.v = self.v.leading_cols(r);
        self
    }
}

/// Thin SVD: `min(m, n)` triplets.
pub fn svd(a: &DenseMatrix) -> Result<SvdResult> {
    if !a.is_finite() {
        return Err(Error::domain("svd input contains non-finite entries"));
    }
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Ok(SvdResult {
            u: DenseMatrix::zeros(m, 0),
            sigma: Vec::new(),
            v: DenseMatrix::zeros(n, 0),
        });
    }
    let (u, sigma, v) = if m >= n {
        golub_kahan(a)?
    } else {
        let (u, s, v) = golub_kahan(&a.adjoint())?;
        (v, s, u)
    };
    Ok(normalize(u, sigma, v))
}

/// Leading `r` singular triplets.
pub fn svds(a: &DenseMatrix, r: usize) -> Result<SvdResult> {
    let p = a.rows().min(a.cols());
    if r == 0 || r > p {
        return Err(Error::domain(format!(
            "truncation rank {r} outside 1..={p} for a {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    Ok(svd(a)?.truncate(r))
}

/// Full SVD: `U` is `m × m` and `V` is `n × n`; `sigma` still has
/// `min(m, n)` entries and the extra columns span the null spaces.
pub fn svd_full(a: &DenseMatrix) -> Result<SvdResult> {
    let thin = svd(a)?;
    Ok(SvdResult {
        u: complete_orthonormal(&thin.u),
        sigma: thin.sigma,
        v: complete_orthonormal(&thin.v),
    })
}

/// Extends orthonormal columns to a square unitary matrix.
pub fn complete_orthonormal(q: &DenseMatrix) -> DenseMatrix {
    let (m, k) = q.shape();
    let mut out = DenseMatrix::zeros(m, m);
    out.set_block(0, 0, q);
    let mut used = vec![false; m];
    for col in k..m {
        // Take the unit vector with the largest component outside the span.
        let mut best = (0usize, -1.0f64, Vec::new());
        for (i, taken) in used.iter().enumerate() {
            if *taken {
                continue;
            }
            let mut cand = vec![ZERO; m];
            cand[i] = ONE;
            for _ in 0..2 {
                for j in 0..col {
                    let basis = out.col(j);
                    let proj: Complex64 = basis.iter().zip(&cand).map(|(b, x)| b.conj() * x).sum();
                    for (x, b) in cand.iter_mut().zip(basis) {
                        *x -= proj * b;
                    }
                }
            }
            let norm = frobenius(&cand);
            if norm > best.1 {
                best = (i, norm, cand);
            }
        }
        let (i, norm, cand) = best;
        used[i] = true;
        for (dst, x) in out.col_mut(col).iter_mut().zip(cand) {
            *dst = x / norm;
        }
    }
    out
}

/// Sorts triplets by descending singular value and fixes the phase of each
/// left vector.
fn normalize(u: DenseMatrix, sigma: Vec<f64>, v: DenseMatrix) -> SvdResult {
    let p = sigma.len();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]));

    let mut su = DenseMatrix::zeros(u.rows(), p);
    let mut sv = DenseMatrix::zeros(v.rows(), p);
    let mut ss = Vec::with_capacity(p);
    for (dst, &src) in order.iter().enumerate() {
        let ucol = u.col(src);
        let mut pivot = 0;
        let mut best = -1.0;
        for (i, z) in ucol.iter().enumerate() {
            let mag = z.norm();
            if mag > best {
                best = mag;
                pivot = i;
            }
        }
        let phase = if best > 0.0 {
            ucol[pivot].conj() / best
        } else {
            ONE
        };
        for (d, &z) in su.col_mut(dst).iter_mut().zip(ucol) {
            *d = z * phase;
        }
        for (d, &z) in sv.col_mut(dst).iter_mut().zip(v.col(src)) {
            *d = z * phase;
        }
        su.col_mut(dst)[pivot].im = 0.0;
        ss.push(sigma[src]);
    }
    SvdResult {
        u: su,
        sigma: ss,
        v: sv,
    }
}

/// Elementary reflector `H = I − τ·v·vᴴ` (with `v[0] = 1`) such that
/// `Hᴴ·x = β·e₁` with `β` real.
struct Reflector {
    beta: f64,
    tau: Complex64,
    v: Vec<Complex64>,
}

fn reflector(x: &[Complex64]) -> Reflector {
    let alpha = x[0];
    let tail = frobenius(&x[1..]);
    let mut v = vec![ZERO; x.len()];
    v[0] = ONE;
    if tail == 0.0 && alpha.im == 0.0 {
        return Reflector {
            beta: alpha.re,
            tau: ZERO,
            v,
        };
    }
    let norm = alpha.norm().hypot(tail);
    let beta = if alpha.re >= 0.0 { -norm } else { norm };
    let tau = (Complex64::new(beta, 0.0) - alpha) / beta;
    let scale = ONE / (alpha - beta);
    for (dst, &src) in v[1..].iter_mut().zip(&x[1..]) {
        *dst = src * scale;
    }
    Reflector { beta, tau, v }
}

/// `x ← x − coef·(vᴴx)·v`.
#[inline]
fn reflect(x: &mut [Complex64], v: &[Complex64], coef: Complex64) {
    let s: Complex64 = v.iter().zip(x.iter()).map(|(a, b)| a.conj() * b).sum();
    if s == ZERO {
        return;
    }
    let s = s * coef;
    for (xi, vi) in x.iter_mut().zip(v) {
        *xi -= s * vi;
    }
}

#[inline]
fn rotate(m: &mut DenseMatrix, a: usize, b: usize, c: f64, s: f64) {
    let (x, y) = m.col_pair_mut(a, b);
    for (p, q) in x.iter_mut().zip(y.iter_mut()) {
        let (xp, yq) = (*p, *q);
        *p = xp * c + yq * s;
        *q = yq * c - xp * s;
    }
}

/// SVD of a tall (`m ≥ n`) matrix; unsorted output.
fn golub_kahan(a: &DenseMatrix) -> Result<(DenseMatrix, Vec<f64>, DenseMatrix)> {
    let (m, n) = a.shape();
    debug_assert!(m >= n && n > 0);
    let norm_a = a.frobenius_norm();
    let mut w = a.clone();

    // diag[i] = B(i, i); sup[i] = B(i−1, i), sup[0] = 0.
    let mut diag = vec![0.0; n];
    let mut sup = vec![0.0; n];
    let mut left = Vec::with_capacity(n);
    let mut right = Vec::with_capacity(n.saturating_sub(1));

    for k in 0..n {
        let h = reflector(&w.col(k)[k..]);
        let coef = h.tau.conj();
        if coef != ZERO {
            for j in k + 1..n {
                reflect(&mut w.col_mut(j)[k..], &h.v, coef);
            }
        }
        diag[k] = h.beta;
        left.push(h);

        if k + 1 < n {
            let row: Vec<Complex64> = (k + 1..n).map(|j| w[(k, j)].conj()).collect();
            let h = reflector(&row);
            if h.tau != ZERO {
                // Rows k+1.. of w ← w · (I − τ v vᴴ).
                let mut s = vec![ZERO; m - k - 1];
                for (t, &vj) in h.v.iter().enumerate() {
                    let col = &w.col(k + 1 + t)[k + 1..];
                    for (acc, &x) in s.iter_mut().zip(col) {
                        *acc += x * vj;
                    }
                }
                for (t, &vj) in h.v.iter().enumerate() {
                    let f = h.tau * vj.conj();
                    let col = &mut w.col_mut(k + 1 + t)[k + 1..];
                    for (x, &acc) in col.iter_mut().zip(&s) {
                        *x -= acc * f;
                    }
                }
            }
            sup[k + 1] = h.beta;
            right.push(h);
        }
    }
    drop(w);

    // U = H_0 ⋯ H_{n−1} [I; 0]
    let mut u = DenseMatrix::zeros(m, n);
    for i in 0..n {
        u[(i, i)] = ONE;
    }
    for (k, h) in left.iter().enumerate().rev() {
        if h.tau == ZERO {
            continue;
        }
        for j in k..n {
            reflect(&mut u.col_mut(j)[k..], &h.v, h.tau);
        }
    }
    // V = H'_0 ⋯ H'_{n−2}, H'_k acting on indices k+1..
    let mut v = DenseMatrix::identity(n);
    for (k, h) in right.iter().enumerate().rev() {
        if h.tau == ZERO {
            continue;
        }
        for j in k + 1..n {
            reflect(&mut v.col_mut(j)[k + 1..], &h.v, h.tau);
        }
    }

    bidiagonal_qr(
        &mut diag,
        &mut sup,
        &mut u,
        &mut v,
        CONVERGENCE_TOL * norm_a,
        n * MAX_SWEEPS_PER_VALUE,
    )?;
    Ok((u, diag, v))
}

/// Diagonalizes the real bidiagonal `(diag, sup)` in place with implicit
/// Wilkinson-shifted QR steps, accumulating rotations into `u` and `v`.
fn bidiagonal_qr(
    diag: &mut [f64],
    sup: &mut [f64],
    u: &mut DenseMatrix,
    v: &mut DenseMatrix,
    tol: f64,
    max_steps: usize,
) -> Result<()> {
    let n = diag.len();
    let mut steps = 0usize;
    for k in (0..n).rev() {
        loop {
            // Find l: either sup[l] negligible (split) or diag[l−1] negligible.
            let mut l = k;
            let mut cancel = false;
            loop {
                if l == 0 || sup[l].abs() <= tol {
                    break;
                }
                if diag[l - 1].abs() <= tol {
                    cancel = true;
                    break;
                }
                l -= 1;
            }
            if cancel {
                // diag[l−1] ≈ 0: chase sup[l] out with rotations from the left.
                let nm = l - 1;
                let (mut c, mut s) = (0.0, 1.0);
                for i in l..=k {
                    let f = s * sup[i];
                    sup[i] *= c;
                    if f.abs() <= tol {
                        break;
                    }
                    let g = diag[i];
                    let h = f.hypot(g);
                    diag[i] = h;
                    c = g / h;
                    s = -f / h;
                    rotate(u, nm, i, c, s);
                }
            }

            let z = diag[k];
            if l == k {
                if z < 0.0 {
                    diag[k] = -z;
                    for x in v.col_mut(k) {
                        *x = -*x;
                    }
                }
                break;
            }
            steps += 1;
            if steps > max_steps {
                return Err(Error::Numeric(format!(
                    "bidiagonal QR did not converge in {max_steps} steps"
                )));
            }

            // Shift from the trailing 2x2 block.
            let nm = k - 1;
            let mut x = diag[l];
            let y = diag[nm];
            let g = sup[nm];
            let h = sup[k];
            let mut f = ((y - z) * (y + z) + (g - h) * (g + h)) / (2.0 * h * y);
            let r = f.hypot(1.0);
            f = ((x - z) * (x + z) + h * (y / (f + r.copysign(f)) - h)) / x;

            let (mut c, mut s) = (1.0, 1.0);
            for j in l..=nm {
                let i = j + 1;
                let mut g = sup[i];
                let mut y = diag[i];
                let mut h = s * g;
                g *= c;
                let mut z = f.hypot(h);
                sup[j] = z;
                c = f / z;
                s = h / z;
                f = x * c + g * s;
                g = g * c - x * s;
                h = y * s;
                y *= c;
                rotate(v, j, i, c, s);
                z = f.hypot(h);
                diag[j] = z;
                if z != 0.0 {
                    c = f / z;
                    s = h / z;
                }
                f = c * g + s * y;
                x = c * y - s * g;
                rotate(u, j, i, c, s);
            }
            sup[l] = 0.0;
            sup[k] = f;
            diag[k] = x;
        }
    }
    Ok(())
}
