//! Norms, symmetric eigendecomposition and matrix square roots.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, SpdMatrix, POSITIVITY_TOLERANCE};

/// Above this inner dimension the spectral norm switches from a dense
/// eigensolve to power iteration.
pub const EIGEN_CUTOFF: usize = 64;
pub const POWER_TOLERANCE: f64 = 1e-12;
pub const POWER_MAX_ITER: usize = 10_000;

fn to_nalgebra(a: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(a.rows(), a.cols(), a.as_slice())
}

/// Eigenvalues (unordered) and eigenvectors (as columns) of a symmetric matrix.
///
/// Only the lower triangle is read.
pub fn symmetric_eigen(a: &DenseMatrix) -> Result<(Vec<f64>, DenseMatrix)> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "eigendecomposition of non-square {} x {} matrix",
            a.rows(),
            a.cols()
        )));
    }
    ensure_finite(a)?;
    let eig = to_nalgebra(a).symmetric_eigen();
    let n = a.rows();
    let mut vectors = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            vectors[i * n + j] = eig.eigenvectors[(i, j)];
        }
    }
    Ok((
        eig.eigenvalues.iter().copied().collect(),
        DenseMatrix::from_parts(n, n, vectors),
    ))
}

fn ensure_finite(a: &DenseMatrix) -> Result<()> {
    if a.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput("matrix has non-finite entries".into()))
    }
}

/// Largest singular value of `a`.
pub fn spectral_norm(a: &DenseMatrix) -> Result<f64> {
    ensure_finite(a)?;
    if a.as_slice().iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }
    // Work with the smaller Gram matrix.
    let wide = a.cols() > a.rows();
    let k = a.rows().min(a.cols());
    if k <= EIGEN_CUTOFF {
        let gram = if wide {
            a.matmul_transpose(a)?
        } else {
            let t = a.transpose();
            t.matmul_transpose(&t)?
        };
        let (eigenvalues, _) = symmetric_eigen(&gram)?;
        let top = eigenvalues.iter().copied().fold(0.0_f64, f64::max);
        Ok(top.sqrt())
    } else {
        Ok(power_iteration(a, wide))
    }
}

/// Power iteration on the Gram matrix, applied as two matrix-vector products.
fn power_iteration(a: &DenseMatrix, wide: bool) -> f64 {
    let k = a.rows().min(a.cols());
    let mut v: Vec<f64> = (0..k).map(|i| 1.0 + 1e-3 * (i as f64).sin()).collect();
    normalize(&mut v);
    let apply = |v: &[f64]| -> Vec<f64> {
        if wide {
            let w = a.transpose_mul_vec(v).expect("shape");
            a.mul_vec(&w).expect("shape")
        } else {
            let w = a.mul_vec(v).expect("shape");
            a.transpose_mul_vec(&w).expect("shape")
        }
    };
    let mut lambda = 0.0;
    for _ in 0..POWER_MAX_ITER {
        let mut next = apply(&v);
        let norm = normalize(&mut next);
        if norm == 0.0 {
            return 0.0;
        }
        let converged = (norm - lambda).abs() <= POWER_TOLERANCE * norm;
        lambda = norm;
        v = next;
        if converged {
            break;
        }
    }
    lambda.sqrt()
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = crate::matrix::norm2(v);
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// `sqrt(Σ a_ij²)`.
pub fn frobenius_norm(a: &DenseMatrix) -> f64 {
    crate::matrix::norm2(a.as_slice())
}

/// Symmetric positive definite square root via full eigendecomposition.
pub fn spd_sqrt(s: &SpdMatrix) -> Result<SpdMatrix> {
    let m = s.as_matrix();
    if s.is_identity() {
        return Ok(s.clone());
    }
    let (eigenvalues, vectors) = symmetric_eigen(m)?;
    let min = eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min <= POSITIVITY_TOLERANCE {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: min,
            tolerance: POSITIVITY_TOLERANCE,
        });
    }
    let p = s.p();
    let roots: Vec<f64> = eigenvalues.iter().map(|l| l.sqrt()).collect();
    let mut out = DenseMatrix::zeros(p, p);
    for i in 0..p {
        for j in 0..=i {
            let v: f64 = (0..p)
                .map(|k| vectors[(i, k)] * roots[k] * vectors[(j, k)])
                .sum();
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    SpdMatrix::new(out)
}
