//! Sparse signals, signal noise and sensing operators.
//!
//! Everything here takes an explicit generator so that Monte-Carlo trials
//! can run concurrently with per-trial streams.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::error::{Error, Result};

/// A strictly `k`-sparse vector together with the parameters it was drawn from.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSignal {
    values: DVector<f64>,
    support: Vec<usize>,
    sigma_x2: f64,
}

impl SparseSignal {
    /// Builds a signal from explicit values. The support is taken to be the
    /// given index set; entries outside it must be zero.
    pub fn from_parts(values: DVector<f64>, mut support: Vec<usize>, sigma_x2: f64) -> Result<Self> {
        let n = values.len();
        support.sort_unstable();
        if support.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("support indices must be distinct"));
        }
        if let Some(&j) = support.last() {
            if j >= n {
                return Err(Error::invalid(format!("support index {j} out of range 0..{n}")));
            }
        }
        let mut on_support = vec![false; n];
        for &j in &support {
            on_support[j] = true;
        }
        if let Some(j) = (0..n).find(|&j| !on_support[j] && values[j] != 0.0) {
            return Err(Error::invalid(format!("nonzero entry {j} outside the support")));
        }
        if !(sigma_x2 >= 0.0) {
            return Err(Error::invalid("sigma_x2 must be nonnegative"));
        }
        Ok(Self { values, support, sigma_x2 })
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    /// Sorted support indices.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn sigma_x2(&self) -> f64 {
        self.sigma_x2
    }

    /// Ambient dimension N.
    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// Sparsity K.
    pub fn k(&self) -> usize {
        self.support.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixKind {
    IidGaussian,
    TightFrame,
}

/// Dense M x N measurement operator.
#[derive(Debug, Clone, PartialEq)]
pub struct SensingMatrix {
    entries: DMatrix<f64>,
    kind: MatrixKind,
}

impl SensingMatrix {
    pub fn new(entries: DMatrix<f64>, kind: MatrixKind) -> Self {
        Self { entries, kind }
    }

    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn cols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.entries
    }

    /// `Φx`, checking dimensions.
    pub fn apply(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        if x.len() != self.cols() {
            return Err(Error::DimensionMismatch { expected: self.cols(), got: x.len() });
        }
        Ok(&self.entries * x)
    }

    /// `Φᵀy`, checking dimensions.
    pub fn apply_transpose(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        if y.len() != self.rows() {
            return Err(Error::DimensionMismatch { expected: self.rows(), got: y.len() });
        }
        Ok(self.entries.tr_mul(y))
    }

    /// Columns of Φ selected by `support`, in the given order.
    pub fn columns(&self, support: &[usize]) -> DMatrix<f64> {
        self.entries.select_columns(support)
    }
}

/// Per-entry variances of the signal noise `n` and the measurement noise `e`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NoiseSpec {
    pub sigma_n2: f64,
    pub sigma_e2: f64,
}

impl NoiseSpec {
    pub fn new(sigma_n2: f64, sigma_e2: f64) -> Result<Self> {
        if !(sigma_n2 >= 0.0) || !(sigma_e2 >= 0.0) {
            return Err(Error::invalid("noise variances must be nonnegative"));
        }
        Ok(Self { sigma_n2, sigma_e2 })
    }

    pub fn noiseless() -> Self {
        Self::default()
    }

    /// Signal noise only, the setting of every experiment in this crate.
    pub fn signal_only(sigma_n2: f64) -> Result<Self> {
        Self::new(sigma_n2, 0.0)
    }
}

#[inline]
pub(crate) fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Draws a `k`-sparse signal with a uniformly random support and iid
/// `N(0, sigma_x2)` amplitudes on it.
pub fn gen_sparse_signal<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    sigma_x2: f64,
    rng: &mut R,
) -> Result<SparseSignal> {
    if k == 0 || k > n {
        return Err(Error::invalid(format!("sparsity k={k} must satisfy 1 <= k <= n={n}")));
    }
    if !(sigma_x2 > 0.0) || !sigma_x2.is_finite() {
        return Err(Error::invalid("sigma_x2 must be positive"));
    }
    let mut support = rand::seq::index::sample(rng, n, k).into_vec();
    support.sort_unstable();
    let amp = Normal::new(0.0, sigma_x2.sqrt()).expect("positive std");
    let mut values = DVector::zeros(n);
    for &j in &support {
        values[j] = amp.sample(rng);
    }
    Ok(SparseSignal { values, support, sigma_x2 })
}

/// Signal-noise variance that realizes `isnr_db` for the given signal model.
pub fn sigma_n_for_isnr(k: usize, sigma_x2: f64, n: usize, isnr_db: f64) -> f64 {
    (k as f64 * sigma_x2 / n as f64) * 10f64.powf(-isnr_db / 10.0)
}

/// Input SNR in dB computed from expected powers `Kσ_x²` and `Nσ_n²`.
/// Zero noise gives `+inf`.
pub fn isnr_db(x: &SparseSignal, sigma_n2: f64) -> f64 {
    isnr_db_from_params(x.k(), x.sigma_x2(), x.n(), sigma_n2)
}

pub fn isnr_db_from_params(k: usize, sigma_x2: f64, n: usize, sigma_n2: f64) -> f64 {
    if sigma_n2 == 0.0 {
        return f64::INFINITY;
    }
    10.0 * (k as f64 * sigma_x2 / (n as f64 * sigma_n2)).log10()
}

/// M x N matrix with iid `N(0, 1/M)` entries.
pub fn gen_gaussian_matrix<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> Result<SensingMatrix> {
    if m == 0 || n == 0 {
        return Err(Error::invalid("matrix dimensions must be positive"));
    }
    let scale = 1.0 / (m as f64).sqrt();
    let entries = DMatrix::from_iterator(
        m,
        n,
        (0..m * n).map(|_| scale * std_normal(rng)),
    );
    Ok(SensingMatrix::new(entries, MatrixKind::IidGaussian))
}

/// Tight frame with the same row space as `phi`: rows orthonormalized through
/// a Householder QR of `Φᵀ`, then scaled so that `ΦΦᵀ = (N/M) I`.
pub fn make_tight_frame(phi: &SensingMatrix) -> Result<SensingMatrix> {
    let (m, n) = (phi.rows(), phi.cols());
    if m > n {
        return Err(Error::DegenerateMatrix(format!(
            "tight frame needs M <= N, got {m} x {n}"
        )));
    }
    let qr = phi.matrix().transpose().qr();
    let r = qr.r();
    let diag_max = r.diagonal().amax();
    let rank_tol = diag_max * (n as f64) * f64::EPSILON * 16.0;
    if diag_max == 0.0 || r.diagonal().iter().any(|d| d.abs() <= rank_tol) {
        return Err(Error::DegenerateMatrix("input does not have full row rank".into()));
    }
    let q = qr.q();
    let scale = (n as f64 / m as f64).sqrt();
    Ok(SensingMatrix::new(q.transpose() * scale, MatrixKind::TightFrame))
}

/// `Φ(x + n) + e` with freshly drawn white Gaussian `n` and `e`.
pub fn measure<R: Rng + ?Sized>(
    phi: &SensingMatrix,
    x: &DVector<f64>,
    noise: NoiseSpec,
    rng: &mut R,
) -> Result<DVector<f64>> {
    if x.len() != phi.cols() {
        return Err(Error::DimensionMismatch { expected: phi.cols(), got: x.len() });
    }
    let mut y = if noise.sigma_n2 > 0.0 {
        let sd = noise.sigma_n2.sqrt();
        let noisy = x.map(|v| v + sd * std_normal(rng));
        phi.apply(&noisy)?
    } else {
        phi.apply(x)?
    };
    if noise.sigma_e2 > 0.0 {
        let sd = noise.sigma_e2.sqrt();
        y.apply(|v| *v += sd * std_normal(rng));
    }
    Ok(y)
}

/// Variance of `Φn` for a tight frame: `(N/M) σ_n²`. Only defined for `M <= N`.
pub fn noise_fold_variance(n: usize, m: usize, sigma_n2: f64) -> Result<f64> {
    if m == 0 || m > n {
        return Err(Error::invalid(format!(
            "noise folding needs 1 <= m <= n, got m={m}, n={n}"
        )));
    }
    Ok(n as f64 / m as f64 * sigma_n2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn sparse_signal_has_exact_support() {
        let x = gen_sparse_signal(1000, 10, 1.0, &mut rng(1)).unwrap();
        assert_eq!(x.k(), 10);
        assert_eq!(x.values().iter().filter(|v| **v != 0.0).count(), 10);
        assert_eq!(x.values().iter().filter(|v| **v == 0.0).count(), 990);
        assert!(x.support().windows(2).all(|w| w[0] < w[1]));
        for &j in x.support() {
            assert!(x.values()[j] != 0.0);
        }
    }

    #[test]
    fn full_support_when_k_equals_n() {
        let x = gen_sparse_signal(5, 5, 1.0, &mut rng(2)).unwrap();
        assert_eq!(x.support(), &[0, 1, 2, 3, 4]);
    }

    #[test]
    fn sparse_signal_rejects_bad_sparsity() {
        assert!(gen_sparse_signal(10, 0, 1.0, &mut rng(0)).is_err());
        assert!(gen_sparse_signal(10, 11, 1.0, &mut rng(0)).is_err());
        assert!(gen_sparse_signal(10, 2, 0.0, &mut rng(0)).is_err());
    }

    #[test]
    fn sparse_signal_energy_matches_expectation() {
        let mut r = rng(3);
        let draws = 10_000;
        let mean: f64 = (0..draws)
            .map(|_| gen_sparse_signal(1000, 10, 1.0, &mut r).unwrap().values().norm_squared())
            .sum::<f64>()
            / draws as f64;
        assert!((mean - 10.0).abs() < 0.5, "mean energy {mean}");
    }

    #[test]
    fn isnr_inversion() {
        assert!((sigma_n_for_isnr(10, 1.0, 1000, 10.0) - 1e-3).abs() < 1e-15);
        assert!((sigma_n_for_isnr(7, 1.0, 7, 0.0) - 1.0).abs() < 1e-15);
        assert!((sigma_n_for_isnr(10, 1.0, 1000, 35.0) - 3.162_277_660e-6).abs() < 1e-14);
        assert!((isnr_db_from_params(10, 1.0, 1000, 1e-3) - 10.0).abs() < 1e-12);
        assert!((isnr_db_from_params(10, 1.0, 1000, 3.162e-6) - 35.0).abs() < 0.01);
        assert_eq!(isnr_db_from_params(3, 2.0, 6, 1.0), 0.0);
        assert_eq!(isnr_db_from_params(3, 2.0, 6, 0.0), f64::INFINITY);
    }

    #[test]
    fn gaussian_matrix_entry_variance() {
        let phi = gen_gaussian_matrix(500, 1000, &mut rng(4)).unwrap();
        assert_eq!(phi.kind(), MatrixKind::IidGaussian);
        let count = (500 * 1000) as f64;
        let mean = phi.matrix().sum() / count;
        let var = phi.matrix().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1.0);
        assert!((var * 500.0 - 1.0).abs() < 0.05, "variance {var}");
    }

    #[test]
    fn gaussian_matrix_degenerate_and_tall_shapes() {
        let phi = gen_gaussian_matrix(1, 1, &mut rng(5)).unwrap();
        assert_eq!((phi.rows(), phi.cols()), (1, 1));
        assert!(phi.matrix()[(0, 0)].is_finite());
        let tall = gen_gaussian_matrix(2000, 1000, &mut rng(5)).unwrap();
        assert_eq!((tall.rows(), tall.cols()), (2000, 1000));
        assert!(gen_gaussian_matrix(0, 3, &mut rng(5)).is_err());
    }

    fn tight_frame_error(phi: &SensingMatrix) -> f64 {
        let ratio = phi.cols() as f64 / phi.rows() as f64;
        let gram = phi.matrix() * phi.matrix().transpose();
        let target = DMatrix::<f64>::identity(phi.rows(), phi.rows()) * ratio;
        (gram - target).amax()
    }

    #[test]
    fn tight_frame_from_gaussian() {
        let phi = gen_gaussian_matrix(250, 1000, &mut rng(6)).unwrap();
        let tf = make_tight_frame(&phi).unwrap();
        assert_eq!(tf.kind(), MatrixKind::TightFrame);
        assert!(tight_frame_error(&tf) <= 1e-8);

        // Row space is preserved: projecting the original rows onto the new
        // row space changes nothing.
        let q = tf.matrix() / 2.0;
        let proj = phi.matrix() * q.transpose() * &q;
        assert!((proj - phi.matrix()).amax() < 1e-10);
    }

    #[test]
    fn tight_frame_rows_orthogonal_with_norm_two() {
        let phi = gen_gaussian_matrix(500, 1000, &mut rng(7)).unwrap();
        let tf = make_tight_frame(&phi).unwrap();
        let gram = tf.matrix() * tf.matrix().transpose();
        for i in 0..500 {
            assert!((gram[(i, i)] - 2.0).abs() < 1e-10);
            for j in 0..i {
                assert!(gram[(i, j)].abs() < 1e-10);
            }
        }
    }

    #[test]
    fn tight_frame_is_idempotent_as_a_property() {
        let phi = gen_gaussian_matrix(40, 100, &mut rng(8)).unwrap();
        let once = make_tight_frame(&phi).unwrap();
        let twice = make_tight_frame(&once).unwrap();
        assert!(tight_frame_error(&twice) <= 1e-8);
        // same row space
        let p1 = once.matrix().transpose() * once.matrix();
        let p2 = twice.matrix().transpose() * twice.matrix();
        assert!((p1 - p2).amax() < 1e-10);
    }

    #[test]
    fn tight_frame_rejects_rank_deficient_and_tall() {
        let mut m = DMatrix::<f64>::zeros(3, 6);
        m[(0, 0)] = 1.0;
        m[(1, 0)] = 2.0;
        m[(2, 1)] = 1.0;
        let phi = SensingMatrix::new(m, MatrixKind::IidGaussian);
        assert!(matches!(make_tight_frame(&phi), Err(Error::DegenerateMatrix(_))));
        let tall = gen_gaussian_matrix(6, 3, &mut rng(9)).unwrap();
        assert!(make_tight_frame(&tall).is_err());
    }

    #[test]
    fn measure_noiseless_is_exact_product() {
        let phi = gen_gaussian_matrix(30, 80, &mut rng(10)).unwrap();
        let x = gen_sparse_signal(80, 5, 1.0, &mut rng(11)).unwrap();
        let y = measure(&phi, x.values(), NoiseSpec::noiseless(), &mut rng(12)).unwrap();
        assert_eq!(y, phi.matrix() * x.values());
        let zero = measure(&phi, &DVector::zeros(80), NoiseSpec::noiseless(), &mut rng(12)).unwrap();
        assert!(zero.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn measure_scalar() {
        let phi = SensingMatrix::new(DMatrix::from_element(1, 1, 1.0), MatrixKind::IidGaussian);
        let y = measure(&phi, &DVector::from_element(1, 2.0), NoiseSpec::noiseless(), &mut rng(0)).unwrap();
        assert_eq!(y[0], 2.0);
    }

    #[test]
    fn measure_rejects_dimension_mismatch() {
        let phi = gen_gaussian_matrix(3, 4, &mut rng(0)).unwrap();
        let err = measure(&phi, &DVector::zeros(5), NoiseSpec::noiseless(), &mut rng(0));
        assert!(matches!(err, Err(Error::DimensionMismatch { expected: 4, got: 5 })));
    }

    #[test]
    fn noise_fold_law() {
        assert_eq!(noise_fold_variance(1000, 250, 1.0).unwrap(), 4.0);
        assert_eq!(noise_fold_variance(64, 64, 0.3).unwrap(), 0.3);
        assert!((noise_fold_variance(1000, 500, 0.5).unwrap() - 1.0).abs() < 1e-15);
        assert!(noise_fold_variance(100, 200, 1.0).is_err());
    }

    #[test]
    fn noise_spec_validation() {
        assert!(NoiseSpec::new(-1.0, 0.0).is_err());
        assert!(NoiseSpec::new(0.0, f64::NAN).is_err());
        assert!(NoiseSpec::signal_only(0.5).is_ok());
    }

    #[test]
    fn from_parts_checks_invariants() {
        let v = DVector::from_vec(vec![0.0, 1.0, 0.0]);
        assert!(SparseSignal::from_parts(v.clone(), vec![1], 1.0).is_ok());
        assert!(SparseSignal::from_parts(v.clone(), vec![0], 1.0).is_err());
        assert!(SparseSignal::from_parts(v.clone(), vec![1, 1], 1.0).is_err());
        assert!(SparseSignal::from_parts(v, vec![1, 3], 1.0).is_err());
    }
}
