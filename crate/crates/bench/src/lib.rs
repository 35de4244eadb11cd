//! Shared fixtures for the benchmarks.

use wishart_core::{sample_standard_gaussian_matrix, DenseMatrix, RngSeed};

/// Seeded standard Gaussian square matrix.
pub fn gaussian_square(p: usize, seed: u64) -> DenseMatrix {
    sample_standard_gaussian_matrix(p, p, RngSeed(seed))
}
