//! Seeded Monte-Carlo runner: per-trial pipeline, sweeps over parameter
//! tuples, aggregation and regime maps.
//!
//! Every trial draws from its own generator seeded by
//! [`trial_seed`]`(master_seed, tuple, trial)`, so a sweep produces the same
//! rows whatever the thread count or scheduling order.

mod config;
mod io;
pub mod presets;

pub use config::{read_config, Algorithm, Budget, ExperimentConfig, Isnr, QuantizerKind};
pub use io::{read_aggregates, read_results, write_aggregates, write_issues, write_regime_map, write_results};

use std::cmp::Ordering;
use std::collections::BTreeMap;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quantize::{apply_codebook, dynamic_range, lloyd_max, sign, uniform_quantize, QuantizerSpec};
use crate::reconstruct::{biht, bpdn, oracle_ls, rsnr_db, BihtVariant, SolverOptions};
use crate::signal::{gen_gaussian_matrix, gen_sparse_signal, make_tight_frame, measure, sigma_n_for_isnr, MatrixKind, NoiseSpec};

/// One point of the sweep grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tuple {
    pub n: usize,
    pub k: usize,
    /// Resolved total bit budget.
    pub budget: u64,
    pub bit_depth: u32,
    /// `floor(budget / bit_depth)`.
    pub m: usize,
    pub isnr_db: f64,
}

impl Tuple {
    pub fn new(n: usize, k: usize, budget: u64, bit_depth: u32, isnr_db: f64) -> Result<Self> {
        if bit_depth == 0 {
            return Err(Error::invalid("bit-depth must be at least 1"));
        }
        let m = (budget / bit_depth as u64) as usize;
        if m == 0 {
            return Err(Error::invalid(format!("budget {budget} leaves no measurement at B = {bit_depth}")));
        }
        Ok(Self { n, k, budget, bit_depth, m, isnr_db })
    }

    /// Bits actually spent, `M·B <= budget`.
    pub fn realized_budget(&self) -> u64 {
        self.m as u64 * self.bit_depth as u64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub tuple: Tuple,
    pub trial: usize,
    pub algorithm: Algorithm,
    pub rsnr_db: f64,
    /// `‖x - x̂‖²`, with 1-bit estimates rescaled to `‖x‖` first.
    pub recon_mse: f64,
    pub hamming: Option<f64>,
    pub wall_time_ms: Option<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IssueKind {
    Skipped,
    Failed,
}

impl IssueKind {
    pub fn name(&self) -> &'static str {
        match self {
            IssueKind::Skipped => "skipped",
            IssueKind::Failed => "failed",
        }
    }
}

/// A trial or tuple that produced no result row.
#[derive(Debug, Clone, PartialEq)]
pub struct Issue {
    pub tuple: Tuple,
    pub algorithm: Algorithm,
    /// `None` when the whole tuple was skipped.
    pub trial: Option<usize>,
    pub kind: IssueKind,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub tuple: Tuple,
    pub algorithm: Algorithm,
    pub trials: usize,
    pub rsnr_mean: f64,
    pub rsnr_median: f64,
    /// Sample standard deviation; 0 for a single trial.
    pub rsnr_std: f64,
    /// Mean of `recon_mse`; not part of the aggregate CSV.
    pub mse_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultTable {
    pub rows: Vec<TrialResult>,
    pub aggregates: Vec<Aggregate>,
    pub issues: Vec<Issue>,
}

impl ResultTable {
    pub fn failures(&self) -> usize {
        self.issues.iter().filter(|i| i.kind == IssueKind::Failed).count()
    }
}

const SPLITMIX_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `trial` of `tuple`. Shared by every algorithm in the trial
/// so that they all see the same matrix, signal and noise.
pub fn trial_seed(master_seed: u64, tuple: &Tuple, trial: usize) -> u64 {
    let isnr_bits = if tuple.isnr_db == 0.0 { 0 } else { tuple.isnr_db.to_bits() };
    [
        tuple.n as u64,
        tuple.k as u64,
        tuple.budget,
        tuple.bit_depth as u64,
        isnr_bits,
        trial as u64,
    ]
    .iter()
    .fold(splitmix(master_seed), |h, &w| splitmix(h.wrapping_add(SPLITMIX_GAMMA) ^ w))
}

/// Per-sweep state shared read-only by all trials.
struct Context {
    /// Unit-variance Lloyd-Max designs by bit-depth.
    lloyd: BTreeMap<u32, QuantizerSpec>,
}

impl Context {
    fn new(cfg: &ExperimentConfig) -> Result<Self> {
        let mut lloyd = BTreeMap::new();
        if cfg.quantizer == QuantizerKind::LloydMax {
            for &b in cfg.bit_grid.iter().filter(|b| **b > 1) {
                lloyd.insert(b, unit_lloyd_max(b)?);
            }
        }
        Ok(Self { lloyd })
    }
}

fn unit_lloyd_max(bits: u32) -> Result<QuantizerSpec> {
    Ok(lloyd_max(bits, 1.0, 1e-12, 100_000)?.spec)
}

fn scaled_codebook(unit: &QuantizerSpec, sd: f64) -> Result<QuantizerSpec> {
    match unit {
        QuantizerSpec::LloydMax { levels, thresholds } => QuantizerSpec::lloyd_max(
            levels.iter().map(|v| v * sd).collect(),
            thresholds.iter().map(|v| v * sd).collect(),
        ),
        other => Ok(other.clone()),
    }
}

/// Algorithms of `cfg` that apply at this bit-depth: the sign pipeline at
/// `B = 1`, the multi-bit pipeline otherwise.
fn applicable(cfg: &ExperimentConfig, bits: u32) -> Vec<Algorithm> {
    let mut algs: Vec<Algorithm> = cfg.algorithms.iter().copied().filter(|a| a.is_one_bit() == (bits == 1)).collect();
    algs.sort_unstable();
    algs.dedup();
    algs
}

fn tuple_skip_reason(tuple: &Tuple, alg: Algorithm) -> Option<String> {
    (alg == Algorithm::OracleLs && tuple.m < tuple.k)
        .then(|| format!("oracle least squares needs M >= K, got M = {} < K = {}", tuple.m, tuple.k))
}

/// Results of one trial: one row per algorithm that succeeded, one issue per
/// algorithm that was skipped or failed.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrialOutcome {
    pub results: Vec<TrialResult>,
    pub issues: Vec<Issue>,
}

/// Runs one trial of `tuple` for every configured algorithm that applies at
/// its bit-depth.
pub fn run_trial(cfg: &ExperimentConfig, tuple: &Tuple, trial: usize) -> Result<TrialOutcome> {
    if tuple.n != cfg.n || tuple.k != cfg.k {
        return Err(Error::invalid("tuple dimensions differ from the config"));
    }
    let ctx = Context {
        lloyd: match cfg.quantizer {
            QuantizerKind::LloydMax if tuple.bit_depth > 1 => {
                BTreeMap::from([(tuple.bit_depth, unit_lloyd_max(tuple.bit_depth)?)])
            }
            _ => BTreeMap::new(),
        },
    };
    let mut outcome = TrialOutcome::default();
    let mut algs = Vec::new();
    for alg in applicable(cfg, tuple.bit_depth) {
        match tuple_skip_reason(tuple, alg) {
            Some(reason) => outcome.issues.push(Issue {
                tuple: *tuple,
                algorithm: alg,
                trial: Some(trial),
                kind: IssueKind::Skipped,
                reason,
            }),
            None => algs.push(alg),
        }
    }
    let rest = run_algorithms(cfg, &ctx, tuple, trial, &algs);
    outcome.results.extend(rest.results);
    outcome.issues.extend(rest.issues);
    Ok(outcome)
}

/// Measurement side of a trial: everything up to the quantized vector.
struct Acquisition {
    phi: crate::signal::SensingMatrix,
    x: crate::signal::SparseSignal,
    /// Quantized (or sign) measurements.
    yq: DVector<f64>,
    /// `‖y - Q(y)‖₂`.
    eps: f64,
}

fn acquire(cfg: &ExperimentConfig, ctx: &Context, tuple: &Tuple, rng: &mut ChaCha8Rng) -> Result<Acquisition> {
    let mut phi = gen_gaussian_matrix(tuple.m, tuple.n, rng)?;
    if cfg.matrix_kind == MatrixKind::TightFrame {
        phi = make_tight_frame(&phi)?;
    }
    let x = gen_sparse_signal(tuple.n, tuple.k, cfg.sigma_x2, rng)?;
    let sigma_n2 = if tuple.isnr_db.is_infinite() {
        0.0
    } else {
        sigma_n_for_isnr(tuple.k, cfg.sigma_x2, tuple.n, tuple.isnr_db)
    };
    let y = measure(&phi, x.values(), NoiseSpec::signal_only(sigma_n2)?, rng)?;

    if tuple.bit_depth == 1 {
        let yq = y.map(sign);
        let eps = (&y - &yq).norm();
        return Ok(Acquisition { phi, x, yq, eps });
    }
    let yq = match cfg.quantizer {
        QuantizerKind::Unquantized => y.clone(),
        QuantizerKind::Uniform => {
            // Range from the noiseless measurements; noisy ones may saturate.
            let clean = phi.apply(x.values())?;
            let t = dynamic_range(clean.as_slice())?;
            DVector::from_vec(uniform_quantize(y.as_slice(), t, tuple.bit_depth)?)
        }
        QuantizerKind::LloydMax => {
            let unit = match ctx.lloyd.get(&tuple.bit_depth) {
                Some(spec) => spec.clone(),
                None => unit_lloyd_max(tuple.bit_depth)?,
            };
            let var = (tuple.k as f64 * cfg.sigma_x2 + tuple.n as f64 * sigma_n2) / tuple.m as f64;
            let spec = scaled_codebook(&unit, var.sqrt())?;
            DVector::from_vec(apply_codebook(y.as_slice(), &spec))
        }
    };
    let eps = (&y - &yq).norm();
    Ok(Acquisition { phi, x, yq, eps })
}

fn reconstruct(cfg: &ExperimentConfig, acq: &Acquisition, alg: Algorithm) -> Result<(DVector<f64>, Option<f64>)> {
    let k = acq.x.k();
    match alg {
        Algorithm::OracleLs => Ok((oracle_ls(&acq.phi, &acq.yq, acq.x.support())?, None)),
        Algorithm::Bpdn => {
            let opts = SolverOptions { max_iter: cfg.bpdn_max_iter, ..SolverOptions::bpdn() };
            Ok((bpdn(&acq.phi, &acq.yq, acq.eps, opts)?.estimate, None))
        }
        Algorithm::BihtL1 | Algorithm::BihtL2 => {
            let variant = if alg == Algorithm::BihtL1 { BihtVariant::OneSidedL1 } else { BihtVariant::OneSidedL2 };
            let opts = SolverOptions { max_iter: cfg.biht_max_iter, step_tau: cfg.biht_step, ..SolverOptions::biht(k) };
            let r = biht(&acq.phi, acq.yq.as_slice(), variant, opts)?;
            Ok((r.estimate, r.consistency_hamming))
        }
    }
}

fn squared_error(x: &[f64], xhat: &[f64], rescale: bool) -> f64 {
    let scale = if rescale {
        let hat = xhat.iter().map(|v| v * v).sum::<f64>().sqrt();
        if hat > 0.0 {
            x.iter().map(|v| v * v).sum::<f64>().sqrt() / hat
        } else {
            1.0
        }
    } else {
        1.0
    };
    x.iter().zip(xhat).map(|(a, b)| (a - scale * b).powi(2)).sum()
}

#[cfg(not(target_arch = "wasm32"))]
fn timed<T>(enabled: bool, f: impl FnOnce() -> T) -> (T, Option<f64>) {
    if !enabled {
        return (f(), None);
    }
    let start = std::time::Instant::now();
    let out = f();
    (out, Some(start.elapsed().as_secs_f64() * 1e3))
}

#[cfg(target_arch = "wasm32")]
fn timed<T>(_enabled: bool, f: impl FnOnce() -> T) -> (T, Option<f64>) {
    (f(), None)
}

fn run_algorithms(cfg: &ExperimentConfig, ctx: &Context, tuple: &Tuple, trial: usize, algs: &[Algorithm]) -> TrialOutcome {
    let mut outcome = TrialOutcome::default();
    if algs.is_empty() {
        return outcome;
    }
    let seed = trial_seed(cfg.master_seed, tuple, trial);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fail = |alg: Algorithm, reason: String| Issue {
        tuple: *tuple,
        algorithm: alg,
        trial: Some(trial),
        kind: IssueKind::Failed,
        reason,
    };
    let acq = match acquire(cfg, ctx, tuple, &mut rng) {
        Ok(a) => a,
        Err(e) => {
            outcome.issues.extend(algs.iter().map(|&a| fail(a, e.to_string())));
            return outcome;
        }
    };
    let x = acq.x.values().as_slice();
    for &alg in algs {
        let (res, wall) = timed(cfg.record_timing, || reconstruct(cfg, &acq, alg));
        let one_bit = alg.is_one_bit();
        match res.and_then(|(xhat, hamming)| Ok((rsnr_db(x, xhat.as_slice(), one_bit)?, xhat, hamming))) {
            Ok((rsnr, xhat, hamming)) => outcome.results.push(TrialResult {
                tuple: *tuple,
                trial,
                algorithm: alg,
                rsnr_db: rsnr,
                recon_mse: squared_error(x, xhat.as_slice(), one_bit),
                hamming,
                wall_time_ms: wall,
                seed,
            }),
            Err(e) => outcome.issues.push(fail(alg, e.to_string())),
        }
    }
    outcome
}

/// All tuples of `cfg` in sweep order: budget, then bit-depth, then ISNR.
pub fn tuples(cfg: &ExperimentConfig) -> Result<Vec<Tuple>> {
    let mut out = Vec::new();
    for budget in &cfg.budgets {
        let total = budget.resolve(cfg.n);
        for &b in &cfg.bit_grid {
            for isnr in &cfg.isnr_list {
                out.push(Tuple::new(cfg.n, cfg.k, total, b, isnr.0)?);
            }
        }
    }
    Ok(out)
}

/// Runs every tuple for `cfg.trials` trials on the current rayon pool.
///
/// Rows come out tuple-major (tuple, then trial, then algorithm) regardless
/// of scheduling. Skips and failures are collected in `issues`; a failing
/// trial never aborts the sweep.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<ResultTable> {
    cfg.validate()?;
    let ctx = Context::new(cfg)?;
    let mut table = ResultTable::default();
    let mut jobs = Vec::new();
    for tuple in tuples(cfg)? {
        let mut algs = Vec::new();
        for alg in applicable(cfg, tuple.bit_depth) {
            match tuple_skip_reason(&tuple, alg) {
                Some(reason) => table.issues.push(Issue {
                    tuple,
                    algorithm: alg,
                    trial: None,
                    kind: IssueKind::Skipped,
                    reason,
                }),
                None => algs.push(alg),
            }
        }
        if !algs.is_empty() {
            jobs.extend((0..cfg.trials).map(|t| (tuple, t, algs.clone())));
        }
    }
    let outcomes: Vec<TrialOutcome> = jobs
        .par_iter()
        .map(|(tuple, t, algs)| run_algorithms(cfg, &ctx, tuple, *t, algs))
        .collect();
    for o in outcomes {
        table.rows.extend(o.results);
        table.issues.extend(o.issues);
    }
    if !table.rows.is_empty() {
        table.aggregates = aggregate(&table.rows)?;
    }
    Ok(table)
}

fn same_group(a: &TrialResult, b: &TrialResult) -> bool {
    a.algorithm == b.algorithm && a.tuple.bit_depth == b.tuple.bit_depth && a.tuple.budget == b.tuple.budget
        && a.tuple.isnr_db.to_bits() == b.tuple.isnr_db.to_bits()
        && a.tuple.n == b.tuple.n
        && a.tuple.k == b.tuple.k
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Per-(tuple, algorithm) statistics, in order of first appearance.
pub fn aggregate(rows: &[TrialResult]) -> Result<Vec<Aggregate>> {
    if rows.is_empty() {
        return Err(Error::invalid("cannot aggregate an empty row set"));
    }
    let mut groups: Vec<Vec<&TrialResult>> = Vec::new();
    for row in rows {
        match groups.iter_mut().find(|g| same_group(g[0], row)) {
            Some(g) => g.push(row),
            None => groups.push(vec![row]),
        }
    }
    Ok(groups
        .into_iter()
        .map(|g| {
            let n = g.len() as f64;
            let mut r: Vec<f64> = g.iter().map(|t| t.rsnr_db).collect();
            let mean = r.iter().sum::<f64>() / n;
            let std = if g.len() > 1 {
                (r.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            r.sort_by(f64::total_cmp);
            Aggregate {
                tuple: g[0].tuple,
                algorithm: g[0].algorithm,
                trials: g.len(),
                rsnr_mean: mean,
                rsnr_median: median(&r),
                rsnr_std: std,
                mse_mean: g.iter().map(|t| t.recon_mse).sum::<f64>() / n,
            }
        })
        .collect())
}

/// Operating regime at the RSNR-optimal bit-depth. Coarse optima (`B <= 2`)
/// are quantization compression, fine ones (`B >= 5`) measurement
/// compression; anything in between is reported as a transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Qc,
    Transition,
    Mc,
}

impl Regime {
    pub fn classify(bits: u32) -> Self {
        match bits {
            0..=2 => Regime::Qc,
            3..=4 => Regime::Transition,
            _ => Regime::Mc,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Regime::Qc => "QC",
            Regime::Transition => "transition",
            Regime::Mc => "MC",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeEntry {
    pub budget: u64,
    pub isnr_db: f64,
    pub best_b: u32,
    pub best_m: usize,
    pub best_rsnr: f64,
    pub algorithm: Algorithm,
    pub regime: Regime,
}

/// For every ISNR of `aggs` at `budget`, the (M, B) pair with the highest
/// mean RSNR over all algorithms. Ties go to the smaller bit-depth. Entries
/// are sorted by ascending ISNR.
pub fn regime_map_from_aggregates(aggs: &[Aggregate], budget: u64) -> Vec<RegimeEntry> {
    let mut best: Vec<RegimeEntry> = Vec::new();
    for a in aggs.iter().filter(|a| a.tuple.budget == budget) {
        let entry = RegimeEntry {
            budget,
            isnr_db: a.tuple.isnr_db,
            best_b: a.tuple.bit_depth,
            best_m: a.tuple.m,
            best_rsnr: a.rsnr_mean,
            algorithm: a.algorithm,
            regime: Regime::classify(a.tuple.bit_depth),
        };
        match best.iter_mut().find(|e| e.isnr_db.to_bits() == a.tuple.isnr_db.to_bits()) {
            Some(e) => {
                let better = match entry.best_rsnr.total_cmp(&e.best_rsnr) {
                    Ordering::Greater => true,
                    Ordering::Equal => (entry.best_b, entry.algorithm) < (e.best_b, e.algorithm),
                    Ordering::Less => false,
                };
                if better {
                    *e = entry;
                }
            }
            None => best.push(entry),
        }
    }
    best.sort_by(|a, b| a.isnr_db.total_cmp(&b.isnr_db));
    best
}

/// Runs the sweep of `cfg` restricted to `budget` and reduces it to a regime
/// map.
pub fn regime_map(cfg: &ExperimentConfig, budget: Budget) -> Result<(ResultTable, Vec<RegimeEntry>)> {
    let mut sub = cfg.clone();
    sub.budgets = vec![budget];
    let table = run_sweep(&sub)?;
    let entries = regime_map_from_aggregates(&table.aggregates, budget.resolve(cfg.n));
    Ok((table, entries))
}

/// ISNR midway between the last QC-or-transition optimum and the first MC
/// optimum above it, scanning upward. `None` if the map never switches.
pub fn transition_isnr(entries: &[RegimeEntry]) -> Option<f64> {
    let mut sorted: Vec<&RegimeEntry> = entries.iter().collect();
    sorted.sort_by(|a, b| a.isnr_db.total_cmp(&b.isnr_db));
    let first_mc = sorted.iter().position(|e| e.regime == Regime::Mc)?;
    if first_mc == 0 || sorted[first_mc - 1].isnr_db.is_infinite() {
        return None;
    }
    Some(0.5 * (sorted[first_mc - 1].isnr_db + sorted[first_mc].isnr_db))
}
