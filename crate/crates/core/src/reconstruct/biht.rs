use nalgebra::DVector;

use super::{sign_disagreement, top_k_indices, ReconResult, SolverOptions};
use crate::error::{Error, Result};
use crate::quantize::sign;
use crate::signal::SensingMatrix;

/// Which one-sided penalty the gradient step descends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BihtVariant {
    /// One-sided ℓ1: step along `Φᵀ(y ⊙ 1[inconsistent])`.
    OneSidedL1,
    /// One-sided ℓ2: step along `-Φᵀ(y ⊙ min(y ⊙ Φx, 0))`.
    OneSidedL2,
}

fn project_sparse(v: &DVector<f64>, k: usize) -> DVector<f64> {
    let mut out = DVector::zeros(v.len());
    for j in top_k_indices(v.as_slice(), k) {
        out[j] = v[j];
    }
    out
}

fn normalized(mut v: DVector<f64>) -> DVector<f64> {
    let norm = v.norm();
    if norm > 0.0 {
        v /= norm;
    }
    v
}

/// Binary iterative hard thresholding from sign measurements.
///
/// Starts from `H_K(Φᵀy)` and iterates `x ← H_K(x - τ g)` until the signs of
/// `Φx` match `y_sign` or `max_iter` is reached. The estimate is returned with
/// unit norm. If the last iterate agrees with fewer signs than the starting
/// point, the most consistent iterate seen is returned instead.
pub fn biht(
    phi: &SensingMatrix,
    y_sign: &[f64],
    variant: BihtVariant,
    opts: SolverOptions,
) -> Result<ReconResult> {
    opts.validate()?;
    let (m, n) = (phi.rows(), phi.cols());
    if y_sign.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: y_sign.len() });
    }
    if let Some((index, &value)) = y_sign.iter().enumerate().find(|(_, v)| **v != 1.0 && **v != -1.0) {
        return Err(Error::InvalidValue { index, value });
    }
    if opts.k > n {
        return Err(Error::invalid(format!("sparsity {} exceeds dimension {n}", opts.k)));
    }
    let a = phi.matrix();
    let y = DVector::from_column_slice(y_sign);
    let k = opts.k;
    let tau = opts.step_tau;

    let mut x = normalized(project_sparse(&a.tr_mul(&y), k));
    if x.iter().all(|v| *v == 0.0) {
        return Ok(collapsed(n, 0, y_sign));
    }
    let mut ax = a * &x;
    let initial_hamming = sign_disagreement(y_sign, ax.as_slice());
    let mut best = (initial_hamming, x.clone());
    let mut hamming = initial_hamming;

    let mut iterations = 0;
    let mut converged = hamming == 0.0;
    while !converged && iterations < opts.max_iter {
        iterations += 1;
        // Weighted residual on the inconsistent measurements only.
        let weights = DVector::from_fn(m, |i, _| {
            let r = y[i] * ax[i];
            let inconsistent = sign(ax[i]) != y[i];
            match variant {
                BihtVariant::OneSidedL1 if inconsistent => y[i],
                BihtVariant::OneSidedL2 if r < 0.0 => -y[i] * r,
                _ => 0.0,
            }
        });
        // x - τ g, with g = -Φᵀ weights for both variants.
        let step = a.tr_mul(&weights) * tau + &x;
        x = project_sparse(&step, k);
        if x.iter().all(|v| *v == 0.0) {
            return Ok(collapsed(n, iterations, y_sign));
        }
        ax = a * &x;
        hamming = sign_disagreement(y_sign, ax.as_slice());
        if hamming < best.0 {
            best = (hamming, x.clone());
        }
        converged = hamming == 0.0;
    }

    let (hamming, x) = if hamming > initial_hamming { best } else { (hamming, x) };
    Ok(ReconResult {
        estimate: normalized(x),
        iterations,
        converged,
        consistency_hamming: Some(hamming),
        zero_estimate: false,
    })
}

fn collapsed(n: usize, iterations: usize, y_sign: &[f64]) -> ReconResult {
    // sign(0) = +1, so the zero estimate disagrees with every negative sign.
    let neg = y_sign.iter().filter(|v| **v < 0.0).count();
    ReconResult {
        estimate: DVector::zeros(n),
        iterations,
        converged: false,
        consistency_hamming: Some(neg as f64 / y_sign.len().max(1) as f64),
        zero_estimate: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reconstruct::hamming_consistency;
    use crate::signal::{gen_gaussian_matrix, gen_sparse_signal};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn signs(phi: &SensingMatrix, x: &DVector<f64>) -> Vec<f64> {
        phi.apply(x).unwrap().iter().map(|v| sign(*v)).collect()
    }

    #[test]
    fn rejects_non_sign_measurements() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let phi = gen_gaussian_matrix(4, 8, &mut rng).unwrap();
        let err = biht(&phi, &[1.0, -1.0, 0.0, 1.0], BihtVariant::OneSidedL1, SolverOptions::biht(2));
        assert!(matches!(err, Err(Error::InvalidValue { index: 2, .. })));
        assert!(biht(&phi, &[1.0; 3], BihtVariant::OneSidedL1, SolverOptions::biht(2)).is_err());
        assert!(biht(&phi, &[1.0; 4], BihtVariant::OneSidedL1, SolverOptions::biht(9)).is_err());
    }

    #[test]
    fn returns_unit_norm_and_reports_consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let phi = gen_gaussian_matrix(400, 128, &mut rng).unwrap();
        let x = gen_sparse_signal(128, 4, 1.0, &mut rng).unwrap();
        let y = signs(&phi, x.values());
        for variant in [BihtVariant::OneSidedL1, BihtVariant::OneSidedL2] {
            let r = biht(&phi, &y, variant, SolverOptions::biht(4)).unwrap();
            assert!((r.estimate.norm() - 1.0).abs() < 1e-12);
            let h = hamming_consistency(&y, &phi, &r.estimate).unwrap();
            assert_eq!(Some(h), r.consistency_hamming);
            if r.converged {
                assert_eq!(h, 0.0);
            }
        }
    }

    #[test]
    fn consistency_never_worse_than_start() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let phi = gen_gaussian_matrix(200, 100, &mut rng).unwrap();
            let x = gen_sparse_signal(100, 5, 1.0, &mut rng).unwrap();
            let mut y = signs(&phi, x.values());
            // flip a few signs to make perfect consistency unlikely
            for i in (0..200).step_by(17) {
                y[i] = -y[i];
            }
            let start = {
                let a0 = phi.apply_transpose(&DVector::from_column_slice(&y)).unwrap();
                let x0 = normalized(project_sparse(&a0, 5));
                hamming_consistency(&y, &phi, &x0).unwrap()
            };
            for variant in [BihtVariant::OneSidedL1, BihtVariant::OneSidedL2] {
                let r = biht(&phi, &y, variant, SolverOptions::biht(5)).unwrap();
                assert!(r.consistency_hamming.unwrap() <= start);
            }
        }
    }

    #[test]
    fn single_spike_is_located() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let trials = 100;
        let mut hits = 0;
        for _ in 0..trials {
            let phi = gen_gaussian_matrix(512, 256, &mut rng).unwrap();
            let x = gen_sparse_signal(256, 1, 1.0, &mut rng).unwrap();
            let y = signs(&phi, x.values());
            let r = biht(&phi, &y, BihtVariant::OneSidedL1, SolverOptions::biht(1)).unwrap();
            let spike = x.support()[0];
            if r.estimate[spike] != 0.0 {
                hits += 1;
            }
        }
        assert!(hits >= 95, "{hits}/{trials}");
    }
}
