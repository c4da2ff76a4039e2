//! Small dense linear-algebra helpers shared by the network and step-size
//! modules. Everything here is deterministic: fixed start vectors, fixed
//! iteration orders, no randomness.

use ndarray::Array2;
use ndarray_linalg::{Eig, SVD};

use crate::error::{Error, Result};

/// Frobenius norm of a dense matrix.
pub fn frobenius(a: &Array2<f64>) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Spectral radius of a general square matrix via Gelfand's formula with
/// normalized repeated squaring: rho(A) = lim ||A^k||^(1/k) evaluated at
/// k = 2^j. Handles complex dominant eigenvalues (directed rings), where
/// plain power iteration on a vector does not settle.
pub fn spectral_radius(a: &Array2<f64>) -> f64 {
    let mut b = a.clone();
    let mut log_scale = 0.0_f64; // b == A^(2^j) / exp(log_scale)
    let mut estimate = 0.0_f64;
    for j in 0..64u32 {
        let s = frobenius(&b);
        if s == 0.0 || !s.is_finite() {
            return 0.0;
        }
        let next = ((log_scale + s.ln()) / f64::powi(2.0, j as i32)).exp();
        if j > 0 && (next - estimate).abs() <= 1e-14 * next.max(1e-300) {
            return next;
        }
        estimate = next;
        let scaled = b.mapv(|x| x / s);
        b = scaled.dot(&scaled);
        log_scale = 2.0 * (log_scale + s.ln());
    }
    estimate
}

/// 2-norm condition number of the eigenbasis of `a`, with eigenvector
/// columns normalized to unit length. Serves as the computable surrogate
/// for the norm-equivalence constants of the constructed mixing norms.
/// Floored at 1; capped when the matrix is numerically defective.
pub fn eigenbasis_condition(a: &Array2<f64>) -> Result<f64> {
    const DEFECTIVE_CAP: f64 = 1e15;
    let (_, vectors) = a
        .eig()
        .map_err(|e| Error::CertificateFailure(format!("eigendecomposition failed: {e}")))?;
    let mut basis = vectors;
    for mut col in basis.columns_mut() {
        let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            col.mapv_inplace(|z| z / norm);
        }
    }
    let (_, singular, _) = basis
        .svd(false, false)
        .map_err(|e| Error::CertificateFailure(format!("svd of eigenbasis failed: {e}")))?;
    let smax = singular.iter().cloned().fold(0.0, f64::max);
    let smin = singular.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(smin > smax / DEFECTIVE_CAP) {
        return Ok(DEFECTIVE_CAP);
    }
    Ok((smax / smin).max(1.0))
}
