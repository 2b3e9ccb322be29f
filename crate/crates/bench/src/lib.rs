//! Seeded inputs shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stpz_core::{Complex64, DenseMatrix, Tensor3};

pub fn random_matrix(seed: u64, rows: usize, cols: usize) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DenseMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

/// Real tensor with entries in `[0, 255)`, shaped like an RGB image.
pub fn random_image_tensor(seed: u64, height: usize, width: usize, channels: usize) -> Tensor3 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Tensor3::from_fn(height, width, channels, |_, _, _| {
        Complex64::new(rng.random_range(0.0..255.0), 0.0)
    })
}
