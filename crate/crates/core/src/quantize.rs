//! Scalar quantizers: uniform midrise with saturation, Lloyd-Max for a
//! Gaussian source, and the 1-bit sign quantizer.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use statrs::function::erf::{erf_inv, erfc};

use crate::error::{Error, Result};

/// Largest supported bit-depth.
pub const MAX_BITS: u32 = 32;

#[derive(Debug, Clone, PartialEq)]
pub enum QuantizerSpec {
    /// `2^bits` equal cells over `[-range, range]`.
    Uniform { range: f64, bits: u32 },
    /// Sorted reproduction levels and the decision thresholds between them.
    LloydMax { levels: Vec<f64>, thresholds: Vec<f64> },
    /// `sign(v)` with `sign(0) = +1`.
    Sign,
}

impl QuantizerSpec {
    pub fn uniform(range: f64, bits: u32) -> Result<Self> {
        check_uniform(range, bits)?;
        Ok(QuantizerSpec::Uniform { range, bits })
    }

    /// Validates a Lloyd-Max style codebook: `2^B` increasing levels and
    /// `2^B - 1` thresholds sitting at the midpoints between them.
    pub fn lloyd_max(levels: Vec<f64>, thresholds: Vec<f64>) -> Result<Self> {
        let l = levels.len();
        if l < 2 || !l.is_power_of_two() {
            return Err(Error::invalid(format!("codebook size {l} is not 2^B with B >= 1")));
        }
        if thresholds.len() != l - 1 {
            return Err(Error::invalid("need exactly one threshold between adjacent levels"));
        }
        if levels.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invalid("levels must be strictly increasing"));
        }
        let scale = levels[l - 1].abs().max(levels[0].abs()).max(1.0);
        for (i, t) in thresholds.iter().enumerate() {
            let mid = 0.5 * (levels[i] + levels[i + 1]);
            if (t - mid).abs() > 1e-9 * scale {
                return Err(Error::invalid(format!(
                    "threshold {i} = {t} is not the midpoint {mid} of its neighbours"
                )));
            }
        }
        Ok(QuantizerSpec::LloydMax { levels, thresholds })
    }

    /// Number of output symbols.
    pub fn alphabet_size(&self) -> usize {
        match self {
            QuantizerSpec::Uniform { bits, .. } => 1usize << (*bits).min(63),
            QuantizerSpec::LloydMax { levels, .. } => levels.len(),
            QuantizerSpec::Sign => 2,
        }
    }

    /// Cell width `Δ = T·2^{1-B}` of a uniform quantizer.
    pub fn cell_width(&self) -> Option<f64> {
        match self {
            QuantizerSpec::Uniform { range, bits } => Some(cell_width(*range, *bits)),
            _ => None,
        }
    }
}

fn check_uniform(range: f64, bits: u32) -> Result<()> {
    if !(range > 0.0) || !range.is_finite() {
        return Err(Error::invalid(format!("quantizer range must be positive, got {range}")));
    }
    if bits == 0 || bits > MAX_BITS {
        return Err(Error::invalid(format!("bit-depth must be in 1..={MAX_BITS}, got {bits}")));
    }
    Ok(())
}

/// `Δ = T·2^{-B+1}`.
pub fn cell_width(range: f64, bits: u32) -> f64 {
    range * 2f64.powi(1 - bits as i32)
}

/// Quantizer range `T = max |y_i|`.
pub fn dynamic_range(y: &[f64]) -> Result<f64> {
    if y.is_empty() {
        return Err(Error::invalid("dynamic range of an empty vector"));
    }
    if let Some((index, &value)) = y.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::InvalidValue { index, value });
    }
    let t = y.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if t == 0.0 {
        return Err(Error::DegenerateRange);
    }
    Ok(t)
}

#[inline]
fn uniform_scalar(v: f64, range: f64, bits: u32, delta: f64) -> f64 {
    let top = (2f64.powi(bits as i32)) - 1.0;
    let clamped = v.clamp(-range, range);
    let cell = ((clamped + range) / delta).floor().clamp(0.0, top);
    -range + delta * (cell + 0.5)
}

/// Midrise uniform quantizer over `[-T, T]` with `2^B` cells. Inputs outside
/// the range saturate to the outermost midpoints `±(T - Δ/2)`.
pub fn uniform_quantize(v: &[f64], range: f64, bits: u32) -> Result<Vec<f64>> {
    check_uniform(range, bits)?;
    if let Some((index, &value)) = v.iter().enumerate().find(|(_, x)| !x.is_finite()) {
        return Err(Error::InvalidValue { index, value });
    }
    let delta = cell_width(range, bits);
    Ok(v.iter().map(|&x| uniform_scalar(x, range, bits, delta)).collect())
}

#[inline]
pub fn sign(v: f64) -> f64 {
    if v < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Element-wise quantization with any codebook.
pub fn apply_codebook(v: &[f64], spec: &QuantizerSpec) -> Vec<f64> {
    match spec {
        QuantizerSpec::Uniform { range, bits } => {
            let delta = cell_width(*range, *bits);
            v.iter().map(|&x| uniform_scalar(x, *range, *bits, delta)).collect()
        }
        QuantizerSpec::LloydMax { levels, thresholds } => v
            .iter()
            .map(|&x| levels[thresholds.partition_point(|t| *t < x)])
            .collect(),
        QuantizerSpec::Sign => v.iter().map(|&x| sign(x)).collect(),
    }
}

/// Mean squared difference.
pub fn distortion(v: &[f64], q: &[f64]) -> Result<f64> {
    if v.len() != q.len() {
        return Err(Error::DimensionMismatch { expected: v.len(), got: q.len() });
    }
    if v.is_empty() {
        return Ok(0.0);
    }
    Ok(v.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / v.len() as f64)
}

/// Output of the Lloyd-Max design iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct LloydMaxDesign {
    pub spec: QuantizerSpec,
    /// Expected squared error for `N(0, sigma2)` input.
    pub distortion: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Distortion after each iteration, in the unit-variance domain.
    pub history: Vec<f64>,
}

// Standard normal helpers. Tails are evaluated with erfc on the short side so
// that mass of far cells does not cancel.

fn pdf(x: f64) -> f64 {
    if x.is_infinite() {
        0.0
    } else {
        (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
    }
}

/// Upper tail `P(X > x)`.
fn upper_tail(x: f64) -> f64 {
    if x == f64::INFINITY {
        0.0
    } else if x == f64::NEG_INFINITY {
        1.0
    } else {
        0.5 * erfc(x * FRAC_1_SQRT_2)
    }
}

fn cell_mass(a: f64, b: f64) -> f64 {
    if a >= 0.0 {
        upper_tail(a) - upper_tail(b)
    } else if b <= 0.0 {
        upper_tail(-b) - upper_tail(-a)
    } else {
        1.0 - upper_tail(b) - upper_tail(-a)
    }
}

/// `x φ(x)`, zero at infinity.
fn x_pdf(x: f64) -> f64 {
    if x.is_infinite() {
        0.0
    } else {
        x * pdf(x)
    }
}

/// Zeroth, first and second moments of the standard normal over `[a, b]`.
fn cell_moments(a: f64, b: f64) -> (f64, f64, f64) {
    let m0 = cell_mass(a, b);
    let m1 = pdf(a) - pdf(b);
    let m2 = m0 + x_pdf(a) - x_pdf(b);
    (m0, m1, m2)
}

fn cell_bounds(thresholds: &[f64], i: usize) -> (f64, f64) {
    let a = if i == 0 { f64::NEG_INFINITY } else { thresholds[i - 1] };
    let b = thresholds.get(i).copied().unwrap_or(f64::INFINITY);
    (a, b)
}

/// Unit-variance Gaussian distortion of an arbitrary codebook.
fn unit_distortion(levels: &[f64], thresholds: &[f64]) -> f64 {
    levels
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let (a, b) = cell_bounds(thresholds, i);
            let (m0, m1, m2) = cell_moments(a, b);
            m2 - 2.0 * c * m1 + c * c * m0
        })
        .sum()
}

fn midpoints(levels: &[f64]) -> Vec<f64> {
    levels.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
}

/// Designs the MSE-optimal `B`-bit quantizer for `N(0, sigma2)` by Lloyd
/// iteration (nearest-neighbour thresholds, centroid levels). Stops when no
/// level moves by more than `tol` (in units of the standard deviation).
pub fn lloyd_max(bits: u32, sigma2: f64, tol: f64, max_iter: usize) -> Result<LloydMaxDesign> {
    if bits == 0 || bits > 16 {
        return Err(Error::invalid(format!("Lloyd-Max design supports 1..=16 bits, got {bits}")));
    }
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(Error::invalid("sigma2 must be positive"));
    }
    let count = 1usize << bits;

    // Start from the high-resolution optimum: point density proportional to
    // the cube root of the pdf, i.e. quantiles of N(0, 3).
    let mut levels: Vec<f64> = (0..count)
        .map(|i| {
            let p = (i as f64 + 0.5) / count as f64;
            6f64.sqrt() * erf_inv(2.0 * p - 1.0)
        })
        .collect();

    let mut thresholds = midpoints(&levels);
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let next: Vec<f64> = (0..count)
            .map(|i| {
                let (a, b) = cell_bounds(&thresholds, i);
                let (m0, m1, _) = cell_moments(a, b);
                if m0 > 0.0 {
                    m1 / m0
                } else {
                    levels[i]
                }
            })
            .collect();
        let moved = levels
            .iter()
            .zip(&next)
            .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
        levels = next;
        thresholds = midpoints(&levels);
        history.push(unit_distortion(&levels, &thresholds));
        if moved < tol {
            converged = true;
            break;
        }
    }

    let sd = sigma2.sqrt();
    let distortion = sigma2 * unit_distortion(&levels, &thresholds);
    let levels: Vec<f64> = levels.into_iter().map(|l| l * sd).collect();
    let thresholds = midpoints(&levels);
    Ok(LloydMaxDesign {
        spec: QuantizerSpec::LloydMax { levels, thresholds },
        distortion,
        iterations,
        converged,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn dynamic_range_is_max_magnitude() {
        assert_eq!(dynamic_range(&[-0.2, 0.7, -0.9]).unwrap(), 0.9);
        assert!(matches!(dynamic_range(&[0.0]), Err(Error::DegenerateRange)));
        assert!(dynamic_range(&[]).is_err());
        assert!(dynamic_range(&[1.0, f64::NAN]).is_err());
    }

    #[test]
    fn dynamic_range_grows_with_length() {
        // Expected maximum of |g| grows like sqrt(2 ln n); compare a short and
        // a long vector averaged over repetitions.
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut avg = |len: usize| {
            (0..200)
                .map(|_| {
                    let y: Vec<f64> = (0..len).map(|_| StandardNormal.sample(&mut rng)).collect();
                    dynamic_range(&y).unwrap()
                })
                .sum::<f64>()
                / 200.0
        };
        let short = avg(30);
        let long = avg(3000);
        assert!(long > short + 0.8, "short {short} long {long}");
    }

    #[test]
    fn uniform_examples() {
        assert_eq!(uniform_quantize(&[0.3], 1.0, 2).unwrap(), vec![0.25]);
        assert_eq!(uniform_quantize(&[5.0], 1.0, 2).unwrap(), vec![0.75]);
        assert_eq!(uniform_quantize(&[-5.0], 1.0, 2).unwrap(), vec![-0.75]);
        assert_eq!(uniform_quantize(&[-1.0], 1.0, 3).unwrap(), vec![-0.875]);
        assert_eq!(uniform_quantize(&[1.0], 1.0, 3).unwrap(), vec![0.875]);
    }

    #[test]
    fn uniform_rejects_bad_input() {
        assert!(matches!(
            uniform_quantize(&[0.0, f64::INFINITY], 1.0, 2),
            Err(Error::InvalidValue { index: 1, .. })
        ));
        assert!(uniform_quantize(&[0.0], 0.0, 2).is_err());
        assert!(uniform_quantize(&[0.0], 1.0, 0).is_err());
        assert!(uniform_quantize(&[0.0], 1.0, 33).is_err());
        assert!(uniform_quantize(&[0.0], 1.0, 32).is_ok());
    }

    #[test]
    fn codebook_examples() {
        assert_eq!(apply_codebook(&[-0.1, 0.0, 2.0], &QuantizerSpec::Sign), vec![-1.0, 1.0, 1.0]);
        let lm = lloyd_max(1, 1.0, 1e-10, 1000).unwrap();
        let q = apply_codebook(&[0.3], &lm.spec);
        assert!((q[0] - (2.0 / PI).sqrt()).abs() < 1e-9);
        let u = QuantizerSpec::uniform(1.0, 3).unwrap();
        assert_eq!(apply_codebook(&[-1.0], &u), vec![-0.875]);
        assert_eq!(u.cell_width(), Some(0.25));
        assert_eq!(u.alphabet_size(), 8);
    }

    #[test]
    fn distortion_examples() {
        assert_eq!(distortion(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(distortion(&[1.0, -1.0], &[0.0, 0.0]).unwrap(), 1.0);
        assert!(distortion(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn lloyd_max_one_bit_closed_form() {
        let d = lloyd_max(1, 1.0, 1e-10, 1000).unwrap();
        assert!(d.converged);
        let QuantizerSpec::LloydMax { levels, thresholds } = &d.spec else { unreachable!() };
        let c = (2.0 / PI).sqrt();
        assert!((levels[0] + c).abs() < 1e-9 && (levels[1] - c).abs() < 1e-9);
        assert!(thresholds[0].abs() < 1e-12);
        assert!((d.distortion - (1.0 - 2.0 / PI)).abs() < 1e-9);
    }

    #[test]
    fn lloyd_max_scales_with_sigma() {
        let a = lloyd_max(1, 1.0, 1e-10, 1000).unwrap();
        let b = lloyd_max(1, 4.0, 1e-10, 1000).unwrap();
        let (QuantizerSpec::LloydMax { levels: la, .. }, QuantizerSpec::LloydMax { levels: lb, .. }) =
            (&a.spec, &b.spec)
        else {
            unreachable!()
        };
        for (x, y) in la.iter().zip(lb) {
            assert!((2.0 * x - y).abs() < 1e-12);
        }
        assert!((4.0 * a.distortion - b.distortion).abs() < 1e-12);
    }

    #[test]
    fn lloyd_max_history_is_nonincreasing() {
        for bits in 1..=6 {
            let d = lloyd_max(bits, 1.0, 1e-10, 100_000).unwrap();
            assert!(d.converged, "B={bits} did not converge");
            for w in d.history.windows(2) {
                assert!(w[1] <= w[0] + 1e-15, "B={bits}: {} -> {}", w[0], w[1]);
            }
            assert!(QuantizerSpec::lloyd_max(
                match &d.spec {
                    QuantizerSpec::LloydMax { levels, .. } => levels.clone(),
                    _ => unreachable!(),
                },
                match &d.spec {
                    QuantizerSpec::LloydMax { thresholds, .. } => thresholds.clone(),
                    _ => unreachable!(),
                },
            )
            .is_ok());
        }
    }

    #[test]
    fn lloyd_max_reports_non_convergence() {
        let d = lloyd_max(4, 1.0, 1e-14, 3).unwrap();
        assert!(!d.converged);
        assert_eq!(d.iterations, 3);
    }

    #[test]
    fn lloyd_max_codebook_validation() {
        assert!(QuantizerSpec::lloyd_max(vec![-1.0, 1.0], vec![0.0]).is_ok());
        assert!(QuantizerSpec::lloyd_max(vec![-1.0, 1.0], vec![0.5]).is_err());
        assert!(QuantizerSpec::lloyd_max(vec![-1.0, 0.0, 1.0], vec![-0.5, 0.5]).is_err());
        assert!(QuantizerSpec::lloyd_max(vec![1.0, -1.0], vec![0.0]).is_err());
    }

    #[test]
    fn lloyd_max_beats_uniform_at_matched_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let v: Vec<f64> = (0..200_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        for bits in 1..=6 {
            let lm = lloyd_max(bits, 1.0, 1e-10, 100_000).unwrap();
            let dl = distortion(&v, &apply_codebook(&v, &lm.spec)).unwrap();
            let du = distortion(&v, &uniform_quantize(&v, 4.0, bits).unwrap()).unwrap();
            assert!(dl <= du, "B={bits}: lloyd {dl} uniform {du}");
        }
    }
}
