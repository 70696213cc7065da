use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::{least_squares, ReconResult, SolverOptions};
use crate::error::{Error, Result};
use crate::signal::SensingMatrix;

/// Solves `min ‖x‖₁ s.t. ‖y - Φx‖₂ <= eps` with ADMM on the splitting
/// `w = x`, `z = Φx`, where `w` carries the ℓ1 term and `z` the data ball.
///
/// The `x`-update `(I + ΦᵀΦ)x = b` is independent of the penalty, so the
/// penalty is adapted by residual balancing without refactoring. Both split
/// blocks use over-relaxation with factor 1.6. On exit the
/// sparse iterate `w` is nudged back into the ball along the least-norm
/// direction if it sits outside by more than `tol` relative.
pub fn bpdn(phi: &SensingMatrix, y: &DVector<f64>, eps: f64, opts: SolverOptions) -> Result<ReconResult> {
    opts.validate()?;
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(Error::invalid(format!("eps must be finite and nonnegative, got {eps}")));
    }
    let (m, n) = (phi.rows(), phi.cols());
    if y.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: y.len() });
    }
    if y.norm() <= eps {
        return Ok(ReconResult {
            estimate: DVector::zeros(n),
            iterations: 0,
            converged: true,
            consistency_hamming: None,
            zero_estimate: true,
        });
    }

    let a = phi.matrix();
    let solver = XUpdate::new(a)?;

    let mut rho = initial_penalty(a, y);
    let mut x = DVector::<f64>::zeros(n);
    let mut w = DVector::<f64>::zeros(n);
    let mut z = y.clone();
    let mut u = DVector::<f64>::zeros(m);
    let mut v = DVector::<f64>::zeros(n);
    let mut ax = DVector::<f64>::zeros(m);

    let abs_tol = opts.tol * 1e-3 * (y.norm() / (m as f64).sqrt()).max(f64::MIN_POSITIVE);
    let mut converged = false;
    let mut iterations = 0;
    let mut last_l1 = f64::INFINITY;

    while iterations < opts.max_iter {
        iterations += 1;

        let b = a.tr_mul(&(&z - &u)) + (&w - &v);
        solver.solve(a, &b, &mut x, &mut ax);

        let z_prev = z.clone();
        let w_prev = w.clone();

        // Over-relaxed copies of Φx and x.
        let ax_r = &ax * RELAX + &z_prev * (1.0 - RELAX);
        let x_r = &x * RELAX + &w_prev * (1.0 - RELAX);

        let mut d = &ax_r + &u - y;
        let dn = d.norm();
        if dn > eps {
            d *= eps / dn;
        }
        z = y + d;
        w = (&x_r + &v).map(|t| soft(t, 1.0 / rho));

        u += &ax_r - &z;
        v += &x_r - &w;
        let rz = &ax - &z;
        let rw = &x - &w;

        let l1 = w.lp_norm(1);
        let obj_change = (l1 - last_l1).abs() / l1.max(f64::MIN_POSITIVE);
        last_l1 = l1;

        if iterations % 10 == 0 || iterations == opts.max_iter {
            let primal = (rz.norm_squared() + rw.norm_squared()).sqrt();
            let dual = rho * (a.tr_mul(&(&z - &z_prev)) + (&w - &w_prev)).norm();
            let scale_pri = (ax.norm_squared() + x.norm_squared())
                .max(z.norm_squared() + w.norm_squared())
                .sqrt();
            let scale_dual = rho * (a.tr_mul(&u) + &v).norm();
            let eps_pri = ((m + n) as f64).sqrt() * abs_tol + opts.tol * scale_pri;
            let eps_dual = (n as f64).sqrt() * abs_tol + opts.tol * scale_dual;
            if primal <= eps_pri && dual <= eps_dual && obj_change <= opts.tol {
                converged = true;
                break;
            }
            // Residual balancing; scaled duals are rescaled with the penalty.
            if primal > 10.0 * dual {
                rho *= 2.0;
                u *= 0.5;
                v *= 0.5;
            } else if dual > 10.0 * primal {
                rho *= 0.5;
                u *= 2.0;
                v *= 2.0;
            }
        }
    }

    let mut estimate = w;
    if opts.debias {
        estimate = debias(phi, y, &estimate)?;
    }
    let residual = y - a * &estimate;
    if residual.norm() > eps * (1.0 + 0.5 * opts.tol) {
        estimate += pull_into_ball(a, &residual, eps)?;
    }
    let zero_estimate = estimate.iter().all(|v| *v == 0.0);
    Ok(ReconResult { estimate, iterations, converged, consistency_hamming: None, zero_estimate })
}

const RELAX: f64 = 1.6;

#[inline]
fn soft(t: f64, thresh: f64) -> f64 {
    if t > thresh {
        t - thresh
    } else if t < -thresh {
        t + thresh
    } else {
        0.0
    }
}

/// Penalty so that the first shrinkage threshold is a fraction of the
/// largest back-projected measurement.
fn initial_penalty(a: &DMatrix<f64>, y: &DVector<f64>) -> f64 {
    let peak = a.tr_mul(y).amax();
    if peak > 0.0 {
        10.0 / peak
    } else {
        1.0
    }
}

/// Factored solver for `(I + ΦᵀΦ) x = b`, through the smaller Gram matrix.
enum XUpdate {
    /// `M <= N`: Woodbury with `chol(I + ΦΦᵀ)` and the cached `ΦΦᵀ`.
    Wide { chol: Cholesky<f64, Dyn>, gram: DMatrix<f64> },
    /// `M > N`: direct `chol(I + ΦᵀΦ)`.
    Tall { chol: Cholesky<f64, Dyn> },
}

impl XUpdate {
    fn new(a: &DMatrix<f64>) -> Result<Self> {
        let (m, n) = a.shape();
        let degenerate = || Error::DegenerateMatrix("I + Gram matrix is not positive definite".into());
        if m <= n {
            let gram = a * a.transpose();
            let chol = (&gram + DMatrix::identity(m, m)).cholesky().ok_or_else(degenerate)?;
            Ok(XUpdate::Wide { chol, gram })
        } else {
            let gram = a.tr_mul(a);
            let chol = (gram + DMatrix::identity(n, n)).cholesky().ok_or_else(degenerate)?;
            Ok(XUpdate::Tall { chol })
        }
    }

    /// Writes the solution to `x` and `Φx` to `ax`.
    fn solve(&self, a: &DMatrix<f64>, b: &DVector<f64>, x: &mut DVector<f64>, ax: &mut DVector<f64>) {
        match self {
            XUpdate::Wide { chol, gram } => {
                // x = b - Φᵀ (I + ΦΦᵀ)⁻¹ Φ b ;  Φx = c - G (I + G)⁻¹ c  with c = Φb
                let c = a * b;
                let s = chol.solve(&c);
                *x = b - a.tr_mul(&s);
                *ax = &c - gram * &s;
            }
            XUpdate::Tall { chol } => {
                *x = chol.solve(b);
                *ax = a * &*x;
            }
        }
    }
}

/// Smallest-norm step `δ` making `‖r - Φδ‖ <= eps`, moving only along the
/// component of `r` that lies in the range of Φ.
fn pull_into_ball(a: &DMatrix<f64>, r: &DVector<f64>, eps: f64) -> Result<DVector<f64>> {
    let delta0 = least_squares(a.clone(), r).or_else(|_| min_norm_solve(a, r))?;
    let reach = a * &delta0;
    let outside = (r - &reach).norm();
    let inside = reach.norm();
    if inside == 0.0 {
        return Ok(DVector::zeros(a.ncols()));
    }
    let slack = (eps * eps - outside * outside).max(0.0).sqrt();
    let c = (1.0 - slack / inside).clamp(0.0, 1.0);
    Ok(delta0 * c)
}

/// Minimum-norm solution of an underdetermined system, `Φᵀ(ΦΦᵀ)⁻¹r`.
fn min_norm_solve(a: &DMatrix<f64>, r: &DVector<f64>) -> Result<DVector<f64>> {
    let chol = (a * a.transpose())
        .cholesky()
        .ok_or_else(|| Error::DegenerateMatrix("Φ does not have full row rank".into()))?;
    Ok(a.tr_mul(&chol.solve(r)))
}

/// Least squares on the detected support of `x`.
fn debias(phi: &SensingMatrix, y: &DVector<f64>, x: &DVector<f64>) -> Result<DVector<f64>> {
    let peak = x.amax();
    let support: Vec<usize> = (0..x.len()).filter(|&j| x[j].abs() > 1e-9 * peak).collect();
    if support.is_empty() || support.len() > phi.rows() {
        return Ok(x.clone());
    }
    match least_squares(phi.columns(&support), y) {
        Ok(coeffs) => {
            let mut out = DVector::zeros(x.len());
            for (c, &j) in coeffs.iter().zip(&support) {
                out[j] = *c;
            }
            Ok(out)
        }
        Err(_) => Ok(x.clone()),
    }
}
