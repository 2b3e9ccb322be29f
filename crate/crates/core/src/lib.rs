//! Third-order tensor decompositions built on the semi-tensor product.
//!
//! The crate provides a dense complex tensor type ([`Tensor3`]), the matrix and
//! tensor multiplication operators (Kronecker, semi-tensor, t-product), a dense
//! SVD kernel, nearest-Kronecker-product approximation, and the STP-SVD and
//! t-SVD decompositions with their error bounds. On top of that sit the storage
//! accounting and `STPZ` container used for lossy image compression, plus PPM
//! I/O and PSNR/SSIM metrics.
//!
//! ```
//! use stpz_core::{decomp, Tensor3};
//!
//! let a = Tensor3::from_fn(4, 4, 2, |i, j, k| ((i + 2 * j + k) as f64).into());
//! let f = decomp::tensor_stp_svd(&a, 2, 2).unwrap();
//! let approx = f.reconstruct();
//! assert_eq!(approx.dims(), a.dims());
//! ```

pub mod codec;
pub mod decomp;
pub mod error;
pub mod imaging;
pub mod matrix;
pub mod nkp;
pub mod products;
pub mod spectra;
pub mod tensor;

pub use num_complex::Complex64;

pub use codec::{Method, StorageReport};
pub use decomp::{BlockRank, ErrorBound, MatStpSvd, SplitDims, TSvdFactors, TensorStpSvd};
pub use error::{Error, Result};
pub use imaging::ImageBuffer;
pub use matrix::DenseMatrix;
pub use nkp::KronFactors;
pub use spectra::SvdResult;
pub use tensor::Tensor3;
