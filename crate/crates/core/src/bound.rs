//! Oracle-reconstruction error bound under a fixed bit budget `𝔅 = MB`,
//! the back-of-envelope optimum, and the oracle error helpers behind it.

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::quantize::MAX_BITS;
use crate::signal::{sigma_n_for_isnr, SensingMatrix};

/// Inputs to the bound. `budget` is the total number of bits `𝔅`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundParams {
    pub n: usize,
    pub k: usize,
    pub sigma_x2: f64,
    pub sigma_n2: f64,
    pub budget: f64,
    /// RIP constant of order K.
    pub delta: f64,
    /// Largest pairwise correlation between quantized measurements.
    pub corr_s: f64,
}

impl BoundParams {
    /// Parameters with the noise level set from an input SNR, `δ = 0` and
    /// `𝔖 = 0`.
    pub fn from_isnr(n: usize, k: usize, sigma_x2: f64, isnr_db: f64, budget: f64) -> Self {
        Self {
            n,
            k,
            sigma_x2,
            sigma_n2: sigma_n_for_isnr(k, sigma_x2, n, isnr_db),
            budget,
            delta: 0.0,
            corr_s: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.budget >= 2.0) {
            return Err(Error::invalid(format!("bit budget must be >= 2, got {}", self.budget)));
        }
        if !(0.0..1.0).contains(&self.delta) {
            return Err(Error::invalid(format!("RIP constant must be in [0, 1), got {}", self.delta)));
        }
        if !(self.sigma_x2 >= 0.0) || !(self.sigma_n2 >= 0.0) || !(self.corr_s >= 0.0) {
            return Err(Error::invalid("variances and correlation term must be nonnegative"));
        }
        Ok(())
    }
}

/// The bracketed term `Kσ_x² B 2^{-2B} + Nσ_n² B (1 + 2^{-2B})`.
pub fn bound_inner_term(bits: u32, p: &BoundParams) -> Result<f64> {
    if bits < 2 {
        return Err(Error::OutOfDomain(bits));
    }
    let b = bits as f64;
    let q = 4f64.powi(-(bits as i32));
    Ok(p.k as f64 * p.sigma_x2 * b * q + p.n as f64 * p.sigma_n2 * b * (1.0 + q))
}

/// Full upper bound on `E‖x - x̂‖²` for oracle reconstruction at bit-depth
/// `bits`, with `M = 𝔅/B` taken as a real number.
pub fn theorem1_bound(bits: u32, p: &BoundParams) -> Result<f64> {
    p.validate()?;
    let inner = bound_inner_term(bits, p)?;
    let k = p.k as f64;
    let shrink = 1.0 - p.delta;
    let m = p.budget / bits as f64;
    Ok(2.0 * k / (p.budget * shrink) * inner + k / shrink * (m - 1.0) * p.corr_s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMode {
    /// Only the bracketed term, independent of `δ`, `K` and `𝔖`.
    #[default]
    Inner,
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundCurve {
    pub bit_grid: Vec<u32>,
    pub values: Vec<f64>,
    pub argmin_b: u32,
    /// The minimum sits on the edge of the grid.
    pub boundary_argmin: bool,
}

impl BoundCurve {
    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Evaluates the bound on `b_min..=b_max`; ties go to the smaller bit-depth.
pub fn optimal_bitdepth(p: &BoundParams, b_min: u32, b_max: u32, mode: BoundMode) -> Result<BoundCurve> {
    if b_min < 2 || b_min > b_max || b_max > MAX_BITS {
        return Err(Error::invalid(format!(
            "bit grid {b_min}..={b_max} must satisfy 2 <= b_min <= b_max <= {MAX_BITS}"
        )));
    }
    let bit_grid: Vec<u32> = (b_min..=b_max).collect();
    let values = bit_grid
        .iter()
        .map(|&b| match mode {
            BoundMode::Inner => bound_inner_term(b, p),
            BoundMode::Full => theorem1_bound(b, p),
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = i;
        }
    }
    let argmin_b = bit_grid[best];
    Ok(BoundCurve {
        boundary_argmin: b_min < b_max && (argmin_b == b_min || argmin_b == b_max),
        bit_grid,
        values,
        argmin_b,
    })
}

/// `B ≈ ½ log2(‖x‖²/σ_n² · M/N)`. May be negative.
pub fn envelope_optimal_b(norm_x2: f64, sigma_n2: f64, m: usize, n: usize) -> f64 {
    0.5 * (norm_x2 / sigma_n2 * m as f64 / n as f64).log2()
}

/// `2𝔅/M - log2(M)`; the error is smallest where this matches the log2 input
/// SNR per element.
pub fn envelope_regime_relation(budget: f64, m: usize) -> f64 {
    2.0 * budget / m as f64 - (m as f64).log2()
}

/// Empirical `max_{i≠j} |mean(q_i q_j)|` over sample rows.
///
/// Each row of `samples` is one quantized measurement vector.
pub fn estimate_corr_s(samples: &DMatrix<f64>) -> Result<f64> {
    let (count, dim) = samples.shape();
    if count < 2 || dim < 2 {
        return Err(Error::invalid("need at least two samples of at least two measurements"));
    }
    let gram = samples.tr_mul(samples) / count as f64;
    let mut worst = 0.0f64;
    for j in 0..dim {
        for i in 0..j {
            worst = worst.max(gram[(i, j)].abs());
        }
    }
    Ok(worst)
}

/// Monte-Carlo lower estimate of the order-`k` RIP constant: the worst
/// `max(1 - s_min², s_max² - 1)` over `trials` random `k`-column subsets.
pub fn estimate_rip_delta<R: Rng + ?Sized>(
    phi: &SensingMatrix,
    k: usize,
    trials: usize,
    rng: &mut R,
) -> Result<f64> {
    if k == 0 || k > phi.rows() || k > phi.cols() {
        return Err(Error::invalid(format!("RIP order {k} must be in 1..=min(M, N)")));
    }
    let mut delta = 0.0f64;
    for _ in 0..trials {
        let mut support = rand::seq::index::sample(rng, phi.cols(), k).into_vec();
        support.sort_unstable();
        delta = delta.max(subset_isometry_defect(&phi.columns(&support)));
    }
    Ok(delta)
}

/// `max(1 - s_min², s_max² - 1)` for one column subset.
pub fn subset_isometry_defect(sub: &DMatrix<f64>) -> f64 {
    // Eigenvalues of the k x k Gram matrix are the squared singular values.
    let eig = sub.tr_mul(sub).symmetric_eigenvalues();
    let lo = eig.min();
    let hi = eig.max();
    (1.0 - lo).max(hi - 1.0).max(0.0)
}

/// `K/(1-δ) · (σ_z² + (M-1)𝔖)`: the oracle error bound for correlated noise
/// with the Gershgorin estimate of the covariance's top eigenvalue.
pub fn lemma1_error_bound(sigma_diag: f64, corr_s: f64, m: usize, k: usize, delta: f64) -> Result<f64> {
    if !(delta < 1.0) {
        return Err(Error::invalid(format!("RIP constant must be < 1, got {delta}")));
    }
    let gershgorin = sigma_diag + (m.saturating_sub(1)) as f64 * corr_s;
    Ok(k as f64 / (1.0 - delta) * gershgorin)
}
