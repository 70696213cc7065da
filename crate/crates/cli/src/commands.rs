use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::Path;

use qcs_core::bound::{optimal_bitdepth, BoundMode, BoundParams};
use qcs_core::harness::presets::{self, BoundPreset, PresetKind};
use qcs_core::harness::{
    read_config, regime_map_from_aggregates, run_sweep, transition_isnr, write_aggregates, write_issues,
    write_regime_map, write_results, Aggregate, Budget, ExperimentConfig, Isnr, ResultTable,
};
use qcs_core::plot::{write_svg, Axis, PlotSpec, Series};
use qcs_core::Error;

use crate::grammar::{file_tag, parse_bits, parse_budgets, parse_isnr};
use crate::{BoundArgs, ModeArg, SweepArgs};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Config { .. } | Error::InvalidParameter(_) | Error::OutOfDomain(_) => CliError::Usage(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

pub enum Outcome {
    Success,
    /// Some trials failed; carries the count.
    Partial(usize),
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn create_out(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))
}

fn bound_setup(a: &BoundArgs) -> Result<BoundPreset, CliError> {
    let mut setup = match presets::get("fig1").map(|p| p.kind) {
        Some(PresetKind::Bound(b)) => b,
        _ => unreachable!("fig1 is a bound preset"),
    };
    let from_cfg = |cfg: ExperimentConfig, setup: &mut BoundPreset| {
        setup.n = cfg.n;
        setup.k = cfg.k;
        setup.sigma_x2 = cfg.sigma_x2;
        setup.budget = cfg.budgets[0];
        setup.isnr_list = cfg.isnr_list.iter().map(|s| s.0).collect();
        setup.b_min = cfg.bit_grid.iter().copied().min().unwrap_or(2).max(2);
        setup.b_max = cfg.bit_grid.iter().copied().max().unwrap_or(2).max(setup.b_min);
    };
    if let Some(path) = &a.config {
        from_cfg(read_config(path).map_err(|e| usage(format!("{}: {e}", path.display())))?, &mut setup);
    }
    if let Some(name) = &a.preset {
        match presets::get(name).map(|p| p.kind) {
            Some(PresetKind::Bound(b)) => setup = b,
            Some(PresetKind::Sweep(cfg)) => from_cfg(cfg, &mut setup),
            None => return Err(usage(format!("unknown preset `{name}`"))),
        }
    }
    if let Some(s) = &a.isnr {
        setup.isnr_list = parse_isnr(s).map_err(usage)?;
    }
    if let Some(s) = &a.bits {
        let bits = parse_bits(s).map_err(usage)?;
        let (lo, hi) = (*bits.iter().min().unwrap(), *bits.iter().max().unwrap());
        if bits != (lo..=hi).collect::<Vec<_>>() {
            return Err(usage("bound-curve needs a contiguous bit range such as 2..12"));
        }
        setup.b_min = lo;
        setup.b_max = hi;
    }
    if let Some(s) = &a.budget {
        let budgets = parse_budgets(s).map_err(usage)?;
        if budgets.len() != 1 {
            return Err(usage("bound-curve takes a single budget"));
        }
        setup.budget = budgets[0];
    }
    if let Some(s) = setup.isnr_list.iter().find(|s| !s.is_finite()) {
        return Err(usage(format!("the bound needs a finite ISNR, got {s}")));
    }
    Ok(setup)
}

pub fn bound_curve(a: &BoundArgs) -> Result<Outcome, CliError> {
    let setup = bound_setup(a)?;
    let mode = match a.mode {
        ModeArg::Inner => BoundMode::Inner,
        ModeArg::Full => BoundMode::Full,
    };
    let budget = setup.budget.resolve(setup.n);
    create_out(&a.out)?;
    for &isnr in &setup.isnr_list {
        let mut p = BoundParams::from_isnr(setup.n, setup.k, setup.sigma_x2, isnr, budget as f64);
        p.delta = a.delta;
        p.corr_s = a.corr_s;
        p.validate()?;
        let curve = optimal_bitdepth(&p, setup.b_min, setup.b_max, mode)?;

        let mut csv = String::from("isnr_db,bit_depth,m,value,is_min\n");
        for (b, v) in curve.bit_grid.iter().zip(&curve.values) {
            let m = budget / *b as u64;
            csv.push_str(&format!("{isnr},{b},{m},{v},{}\n", u8::from(*b == curve.argmin_b)));
        }
        let stem = format!("bound_isnr_{}", file_tag(isnr));
        fs::write(a.out.join(format!("{stem}.csv")), csv).map_err(Error::from)?;

        let mode_name = if mode == BoundMode::Inner { "inner term" } else { "full bound" };
        let spec = PlotSpec {
            title: format!("Error bound ({mode_name}), ISNR = {isnr} dB"),
            x_label: "bit-depth B".into(),
            y_label: "bound".into(),
            series: vec![Series::new(
                format!("{isnr} dB"),
                curve.bit_grid.iter().map(|b| *b as f64).collect(),
                curve.values.clone(),
            )],
            markers: vec![(curve.argmin_b as f64, curve.min_value())],
            ..Default::default()
        };
        write_svg(&spec, a.out.join(format!("{stem}.svg")))?;
        println!(
            "ISNR {isnr} dB: optimal B = {} (value {}){}",
            curve.argmin_b,
            curve.min_value(),
            if curve.boundary_argmin { ", on the grid boundary" } else { "" }
        );
    }
    Ok(Outcome::Success)
}

fn sweep_config(a: &SweepArgs) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match (&a.config, &a.preset) {
        (Some(path), _) => read_config(path).map_err(|e| usage(format!("{}: {e}", path.display())))?,
        (None, Some(name)) => match presets::get(name).map(|p| p.kind) {
            Some(PresetKind::Sweep(cfg)) => cfg,
            Some(PresetKind::Bound(_)) => return Err(usage(format!("`{name}` is a bound-curve preset"))),
            None => return Err(usage(format!("unknown preset `{name}`"))),
        },
        (None, None) => return Err(usage("one of --config or --preset is required")),
    };
    if let Some(seed) = a.seed {
        cfg.master_seed = seed;
    }
    if let Some(t) = a.trials {
        cfg.trials = t;
    }
    if let Some(s) = &a.isnr {
        cfg.isnr_list = parse_isnr(s).map_err(usage)?.into_iter().map(Isnr).collect();
    }
    if let Some(s) = &a.bits {
        cfg.bit_grid = parse_bits(s).map_err(usage)?;
    }
    if let Some(s) = &a.budget {
        cfg.budgets = parse_budgets(s).map_err(usage)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_tables(table: &ResultTable, out: &Path) -> Result<(), CliError> {
    write_results(&table.rows, out.join("results.csv"))?;
    write_aggregates(&table.aggregates, out.join("aggregates.csv"))?;
    write_issues(&table.issues, out.join("issues.csv"))?;
    Ok(())
}

fn finish(table: &ResultTable) -> Result<Outcome, CliError> {
    let failed = table.failures();
    let skipped = table.issues.len() - failed;
    println!("{} rows, {} aggregates, {skipped} skipped, {failed} failed", table.rows.len(), table.aggregates.len());
    if failed == 0 {
        Ok(Outcome::Success)
    } else if table.rows.is_empty() {
        Err(CliError::Runtime(format!("all {failed} trial(s) failed")))
    } else {
        Ok(Outcome::Partial(failed))
    }
}

fn isnr_values(aggs: &[Aggregate]) -> Vec<f64> {
    let mut seen: Vec<f64> = Vec::new();
    for a in aggs {
        if !seen.iter().any(|s| s.to_bits() == a.tuple.isnr_db.to_bits()) {
            seen.push(a.tuple.isnr_db);
        }
    }
    seen
}

/// Groups aggregates of one ISNR into series keyed by (bit-depth, algorithm).
fn rsnr_vs_budget(aggs: &[Aggregate], isnr: f64, n: usize) -> Vec<Series> {
    let keys: BTreeSet<_> =
        aggs.iter().filter(|a| a.tuple.isnr_db == isnr).map(|a| (a.tuple.bit_depth, a.algorithm)).collect();
    keys.into_iter()
        .map(|(b, alg)| {
            let pts: Vec<&Aggregate> = aggs
                .iter()
                .filter(|a| a.tuple.isnr_db == isnr && a.tuple.bit_depth == b && a.algorithm == alg)
                .collect();
            Series::new(
                format!("B={b} {alg}"),
                pts.iter().map(|a| a.tuple.budget as f64 / n as f64).collect(),
                pts.iter().map(|a| a.rsnr_mean).collect(),
            )
        })
        .collect()
}

pub fn sweep(a: &SweepArgs) -> Result<Outcome, CliError> {
    let cfg = sweep_config(a)?;
    let table = run_sweep(&cfg)?;
    create_out(&a.out)?;
    write_tables(&table, &a.out)?;
    let aggs = &table.aggregates;
    let single_budget = cfg.budgets.len() == 1;
    for isnr in isnr_values(aggs) {
        let tag = file_tag(isnr);
        let spec = PlotSpec {
            title: format!("RSNR vs. total bits, ISNR = {isnr} dB"),
            x_label: "budget / N".into(),
            y_label: "mean RSNR (dB)".into(),
            series: rsnr_vs_budget(aggs, isnr, cfg.n),
            ..Default::default()
        };
        write_svg(&spec, a.out.join(format!("rsnr_vs_budget_isnr_{tag}.svg")))?;

        if single_budget {
            let mut algs: Vec<_> = aggs.iter().filter(|g| g.tuple.isnr_db == isnr).map(|g| g.algorithm).collect();
            algs.sort_unstable();
            algs.dedup();
            let mut series = Vec::new();
            let mut markers = Vec::new();
            for alg in algs {
                let pts: Vec<&Aggregate> =
                    aggs.iter().filter(|g| g.tuple.isnr_db == isnr && g.algorithm == alg).collect();
                let best = pts.iter().min_by(|x, y| x.mse_mean.total_cmp(&y.mse_mean)).unwrap();
                let best_rsnr = pts.iter().max_by(|x, y| x.rsnr_mean.total_cmp(&y.rsnr_mean)).unwrap();
                println!(
                    "ISNR {isnr} dB, {alg}: min mean error at B = {}, max mean RSNR at B = {}",
                    best.tuple.bit_depth, best_rsnr.tuple.bit_depth
                );
                markers.push((best.tuple.bit_depth as f64, best.mse_mean));
                series.push(Series::new(
                    alg.name(),
                    pts.iter().map(|g| g.tuple.bit_depth as f64).collect(),
                    pts.iter().map(|g| g.mse_mean).collect(),
                ));
            }
            let spec = PlotSpec {
                title: format!("Mean reconstruction error, ISNR = {isnr} dB"),
                x_label: "bit-depth B".into(),
                y_label: "mean squared error".into(),
                series,
                markers,
                ..Default::default()
            };
            write_svg(&spec, a.out.join(format!("error_vs_bits_isnr_{tag}.svg")))?;
        }
    }
    finish(&table)
}

pub fn regime_map(a: &SweepArgs) -> Result<Outcome, CliError> {
    let cfg = sweep_config(a)?;
    let table = run_sweep(&cfg)?;
    create_out(&a.out)?;
    write_tables(&table, &a.out)?;
    let mut all = Vec::new();
    for budget in &cfg.budgets {
        let total = budget.resolve(cfg.n);
        let entries = regime_map_from_aggregates(&table.aggregates, total);
        if entries.is_empty() {
            continue;
        }
        for e in &entries {
            println!(
                "budget {total}, ISNR {} dB: B = {}, M = {}, RSNR {:.2} dB ({}, {})",
                e.isnr_db,
                e.best_b,
                e.best_m,
                e.best_rsnr,
                e.algorithm,
                e.regime.name()
            );
        }
        match transition_isnr(&entries) {
            Some(t) => println!("budget {total}: transition to B >= 5 near {t} dB"),
            None => println!("budget {total}: no transition on this ISNR grid"),
        }
        let finite: Vec<_> = entries.iter().filter(|e| e.isnr_db.is_finite()).collect();
        if !finite.is_empty() {
            let x: Vec<f64> = finite.iter().map(|e| e.isnr_db).collect();
            let spec = PlotSpec {
                title: format!("Best (M, B) at budget {}", Budget::Absolute(total)),
                x_label: "ISNR (dB)".into(),
                y_label: "measurements M".into(),
                y2_label: "bit-depth B".into(),
                series: vec![
                    Series::new("M", x.clone(), finite.iter().map(|e| e.best_m as f64).collect()),
                    Series {
                        axis: Axis::Right,
                        dashed: true,
                        ..Series::new("B", x, finite.iter().map(|e| e.best_b as f64).collect())
                    },
                ],
                ..Default::default()
            };
            write_svg(&spec, a.out.join(format!("regime_map_budget_{total}.svg")))?;
        }
        all.extend(entries);
    }
    write_regime_map(&all, cfg.n, a.out.join("regime_map.csv"))?;
    finish(&table)
}

pub fn presets_list() -> Outcome {
    for p in presets::all() {
        let kind = match p.kind {
            PresetKind::Bound(_) => "bound-curve",
            PresetKind::Sweep(_) => "sweep",
        };
        println!("{:<10} {:<12} {}", p.name, kind, p.description);
    }
    Outcome::Success
}
