//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Each exported operation has a plain Rust counterpart so it can be tested
//! natively.

use qcs_core::bound::{optimal_bitdepth, BoundMode, BoundParams};
use qcs_core::harness::{run_sweep, Algorithm, Budget, ExperimentConfig, QuantizerKind};
use qcs_core::plot::{render_svg, PlotSpec, Series};
use qcs_core::quantize::{apply_codebook, lloyd_max, QuantizerSpec};
use wasm_bindgen::prelude::*;

#[wasm_bindgen(getter_with_clone)]
#[derive(Debug, Clone)]
pub struct BoundView {
    pub svg: String,
    pub argmin: u32,
    pub boundary: bool,
    pub values: Vec<f64>,
}

#[wasm_bindgen(getter_with_clone)]
#[derive(Debug, Clone)]
pub struct QuantizerView {
    pub svg: String,
    pub lloyd_distortion: f64,
    pub uniform_distortion: f64,
    pub levels: Vec<f64>,
}

#[wasm_bindgen(getter_with_clone)]
#[derive(Debug, Clone)]
pub struct SweepView {
    pub svg: String,
    /// Bit-depth with the lowest mean squared error.
    pub best_b: u32,
    pub mean_error: Vec<f64>,
}

/// Bound curve over `b_min..=b_max` for N = 1000, K = 10 and a budget of
/// `budget_mult · N` bits.
pub fn bound_view(
    isnr_db: f64,
    b_min: u32,
    b_max: u32,
    budget_mult: f64,
    full: bool,
    delta: f64,
    corr_s: f64,
) -> Result<BoundView, String> {
    let (n, k) = (1000, 10);
    let budget = Budget::TimesN(budget_mult).resolve(n) as f64;
    let mut p = BoundParams::from_isnr(n, k, 1.0, isnr_db, budget);
    p.delta = delta;
    p.corr_s = corr_s;
    p.validate().map_err(|e| e.to_string())?;
    let mode = if full { BoundMode::Full } else { BoundMode::Inner };
    let curve = optimal_bitdepth(&p, b_min, b_max, mode).map_err(|e| e.to_string())?;
    let spec = PlotSpec {
        title: format!("Error bound at ISNR {isnr_db} dB"),
        x_label: "bit-depth B".into(),
        y_label: "bound".into(),
        series: vec![Series::new(
            "bound",
            curve.bit_grid.iter().map(|b| *b as f64).collect(),
            curve.values.clone(),
        )],
        markers: vec![(curve.argmin_b as f64, curve.min_value())],
        ..Default::default()
    };
    Ok(BoundView {
        svg: render_svg(&spec).map_err(|e| e.to_string())?,
        argmin: curve.argmin_b,
        boundary: curve.boundary_argmin,
        values: curve.values,
    })
}

/// Transfer characteristics of the `bits`-bit Lloyd-Max quantizer for a
/// unit Gaussian and of the uniform quantizer over `[-load, load]`.
pub fn quantizer_view(bits: u32, load: f64) -> Result<QuantizerView, String> {
    if !(1..=10).contains(&bits) {
        return Err("bits must be in 1..=10".into());
    }
    if !(load > 0.0 && load.is_finite()) {
        return Err("load factor must be positive".into());
    }
    let design = lloyd_max(bits, 1.0, 1e-12, 100_000).map_err(|e| e.to_string())?;
    let uniform = QuantizerSpec::uniform(load, bits).map_err(|e| e.to_string())?;
    let grid: Vec<f64> = (0..=800).map(|i| -4.0 + 0.01 * i as f64).collect();
    let lm = apply_codebook(&grid, &design.spec);
    let un = apply_codebook(&grid, &uniform);
    let uniform_distortion = gaussian_distortion(&uniform);
    let levels = match &design.spec {
        QuantizerSpec::LloydMax { levels, .. } => levels.clone(),
        _ => Vec::new(),
    };
    let spec = PlotSpec {
        title: format!("{bits}-bit quantizers, unit Gaussian input"),
        x_label: "input".into(),
        y_label: "output".into(),
        series: vec![
            Series::new("Lloyd-Max", grid.clone(), lm),
            Series { dashed: true, ..Series::new(format!("uniform, T = {load}"), grid, un) },
        ],
        ..Default::default()
    };
    Ok(QuantizerView {
        svg: render_svg(&spec).map_err(|e| e.to_string())?,
        lloyd_distortion: design.distortion,
        uniform_distortion,
        levels,
    })
}

/// Expected squared error for `N(0, 1)` input by midpoint quadrature on
/// `[-10, 10]`.
fn gaussian_distortion(spec: &QuantizerSpec) -> f64 {
    let h = 1e-3;
    let xs: Vec<f64> = (0..20_000).map(|i| -10.0 + h * (i as f64 + 0.5)).collect();
    let q = apply_codebook(&xs, spec);
    let norm = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    xs.iter().zip(&q).map(|(x, v)| (x - v).powi(2) * norm * (-0.5 * x * x).exp() * h).sum()
}

/// Oracle least-squares error against bit-depth `2..=12` at a fixed budget,
/// uniform quantization, `trials` trials per point.
pub fn oracle_sweep_view(n: usize, k: usize, budget_mult: f64, isnr_db: f64, trials: usize, seed: u64) -> Result<SweepView, String> {
    if trials == 0 || trials > 200 || n > 2000 {
        return Err("keep n <= 2000 and 1 <= trials <= 200 in the browser".into());
    }
    let mut cfg = ExperimentConfig::new(n, k, vec![Budget::TimesN(budget_mult)], (2..=12).collect(), vec![isnr_db], trials);
    cfg.algorithms = vec![Algorithm::OracleLs];
    cfg.quantizer = QuantizerKind::Uniform;
    cfg.master_seed = seed;
    let table = run_sweep(&cfg).map_err(|e| e.to_string())?;
    if table.aggregates.is_empty() {
        return Err("every bit-depth was skipped: the budget leaves fewer than K measurements".into());
    }
    let bits: Vec<f64> = table.aggregates.iter().map(|a| a.tuple.bit_depth as f64).collect();
    let mean_error: Vec<f64> = table.aggregates.iter().map(|a| a.mse_mean).collect();
    let best = table
        .aggregates
        .iter()
        .min_by(|a, b| a.mse_mean.total_cmp(&b.mse_mean))
        .expect("nonempty");
    let spec = PlotSpec {
        title: format!("Oracle reconstruction error, ISNR {isnr_db} dB"),
        x_label: "bit-depth B".into(),
        y_label: "mean squared error".into(),
        series: vec![Series::new("oracle LS", bits, mean_error.clone())],
        markers: vec![(best.tuple.bit_depth as f64, best.mse_mean)],
        ..Default::default()
    };
    Ok(SweepView { svg: render_svg(&spec).map_err(|e| e.to_string())?, best_b: best.tuple.bit_depth, mean_error })
}

#[wasm_bindgen(js_name = boundCurve)]
pub fn bound_curve_js(
    isnr_db: f64,
    b_min: u32,
    b_max: u32,
    budget_mult: f64,
    full: bool,
    delta: f64,
    corr_s: f64,
) -> Result<BoundView, JsError> {
    bound_view(isnr_db, b_min, b_max, budget_mult, full, delta, corr_s).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = quantizers)]
pub fn quantizers_js(bits: u32, load: f64) -> Result<QuantizerView, JsError> {
    quantizer_view(bits, load).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = oracleSweep)]
pub fn oracle_sweep_js(n: usize, k: usize, budget_mult: f64, isnr_db: f64, trials: usize, seed: u64) -> Result<SweepView, JsError> {
    oracle_sweep_view(n, k, budget_mult, isnr_db, trials, seed).map_err(|e| JsError::new(&e))
}
