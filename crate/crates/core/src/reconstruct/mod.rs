//! Sparse reconstruction: oracle least squares, BPDN and the two BIHT
//! variants, together with the recovery metrics used by the experiments.

mod biht;
mod bpdn;

pub use biht::{biht, BihtVariant};
pub use bpdn::bpdn;

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::quantize::sign;
use crate::signal::SensingMatrix;

/// Upper cap reported by [`rsnr_db`] for an exact reconstruction.
pub const RSNR_CAP_DB: f64 = 300.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ReconResult {
    pub estimate: DVector<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Fraction of sign measurements the estimate disagrees with (1-bit only).
    pub consistency_hamming: Option<f64>,
    /// Set when the iteration collapsed to the zero vector.
    pub zero_estimate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub max_iter: usize,
    /// Gradient step for BIHT.
    pub step_tau: f64,
    pub tol: f64,
    /// Sparsity used by the hard-thresholding projection.
    pub k: usize,
    /// Re-fit BPDN output by least squares on its detected support.
    pub debias: bool,
}

impl SolverOptions {
    pub fn bpdn() -> Self {
        Self { max_iter: 2000, step_tau: 1.0, tol: 1e-6, k: 1, debias: false }
    }

    pub fn biht(k: usize) -> Self {
        Self { max_iter: 100, step_tau: 1.0, tol: 1e-6, k, debias: false }
    }

    fn validate(&self) -> Result<()> {
        if self.max_iter == 0 || !(self.step_tau > 0.0) || !(self.tol > 0.0) || self.k == 0 {
            return Err(Error::invalid("solver options must all be positive"));
        }
        Ok(())
    }
}

/// Least-squares solve of `min ‖A z - y‖` through a Householder QR. Fails if
/// `A` is rank deficient.
pub(crate) fn least_squares(a: DMatrix<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
    let (m, k) = a.shape();
    if k > m {
        return Err(Error::DegenerateSupport);
    }
    if k == 0 {
        return Ok(DVector::zeros(0));
    }
    let qr = a.qr();
    let r = qr.r();
    let diag_max = r.diagonal().amax();
    let tol = diag_max * m as f64 * f64::EPSILON * 16.0;
    if diag_max == 0.0 || r.diagonal().iter().any(|d| d.abs() <= tol) {
        return Err(Error::DegenerateSupport);
    }
    let qty = qr.q().tr_mul(y);
    r.solve_upper_triangular(&qty).ok_or(Error::DegenerateSupport)
}

/// Oracle-assisted estimate: least squares restricted to the true support,
/// zero elsewhere.
pub fn oracle_ls(phi: &SensingMatrix, y: &DVector<f64>, support: &[usize]) -> Result<DVector<f64>> {
    if y.len() != phi.rows() {
        return Err(Error::DimensionMismatch { expected: phi.rows(), got: y.len() });
    }
    if let Some(&j) = support.iter().find(|&&j| j >= phi.cols()) {
        return Err(Error::invalid(format!("support index {j} out of range")));
    }
    if support.len() > phi.rows() {
        return Err(Error::DegenerateSupport);
    }
    let coeffs = least_squares(phi.columns(support), y)?;
    let mut x = DVector::zeros(phi.cols());
    for (c, &j) in coeffs.iter().zip(support) {
        x[j] = *c;
    }
    Ok(x)
}

/// Indices of the `k` largest-magnitude entries, ties going to the lower index.
pub(crate) fn top_k_indices(v: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    let k = k.min(v.len());
    if k == 0 {
        return Vec::new();
    }
    let cmp = |a: &usize, b: &usize| -> Ordering {
        v[*b].abs().total_cmp(&v[*a].abs()).then(a.cmp(b))
    };
    if k < idx.len() {
        idx.select_nth_unstable_by(k - 1, cmp);
        idx.truncate(k);
    }
    idx.sort_unstable();
    idx
}

/// Keeps the `k` largest-magnitude entries and zeroes the rest.
pub fn hard_threshold(v: &[f64], k: usize) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    for j in top_k_indices(v, k) {
        out[j] = v[j];
    }
    out
}

/// Reconstruction SNR `10 log10(‖x‖² / ‖x - x̂‖²)`, capped at
/// [`RSNR_CAP_DB`]. With `rescale_1bit` the estimate is first scaled to the
/// norm of `x_true`.
pub fn rsnr_db(x_true: &[f64], x_hat: &[f64], rescale_1bit: bool) -> Result<f64> {
    if x_true.len() != x_hat.len() {
        return Err(Error::DimensionMismatch { expected: x_true.len(), got: x_hat.len() });
    }
    let energy: f64 = x_true.iter().map(|v| v * v).sum();
    if energy == 0.0 {
        return Err(Error::invalid("rsnr of an all-zero reference signal"));
    }
    let scale = if rescale_1bit {
        let hat_norm = x_hat.iter().map(|v| v * v).sum::<f64>().sqrt();
        if hat_norm > 0.0 {
            energy.sqrt() / hat_norm
        } else {
            1.0
        }
    } else {
        1.0
    };
    let err: f64 = x_true
        .iter()
        .zip(x_hat)
        .map(|(a, b)| {
            let d = a - scale * b;
            d * d
        })
        .sum();
    if err == 0.0 {
        return Ok(RSNR_CAP_DB);
    }
    Ok((10.0 * (energy / err).log10()).min(RSNR_CAP_DB))
}

/// Fraction of measurements where `sign(Φx̂)` disagrees with `y_sign`.
pub fn hamming_consistency(y_sign: &[f64], phi: &SensingMatrix, x_hat: &DVector<f64>) -> Result<f64> {
    if y_sign.len() != phi.rows() {
        return Err(Error::DimensionMismatch { expected: phi.rows(), got: y_sign.len() });
    }
    let proj = phi.apply(x_hat)?;
    Ok(sign_disagreement(y_sign, proj.as_slice()))
}

pub(crate) fn sign_disagreement(y_sign: &[f64], proj: &[f64]) -> f64 {
    if y_sign.is_empty() {
        return 0.0;
    }
    let bad = y_sign.iter().zip(proj).filter(|(y, p)| sign(**p) != **y).count();
    bad as f64 / y_sign.len() as f64
}
