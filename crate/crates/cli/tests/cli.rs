use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

fn qcslab(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qcslab"));
    cmd.args(args).env_remove("QCSLAB_THREADS");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn out_arg(dir: &Path) -> &str {
    dir.to_str().unwrap()
}

fn minimum_of(csv: &str) -> (u32, f64) {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').collect::<Vec<_>>())
        .find(|f| f[4] == "1")
        .map(|f| (f[1].parse().unwrap(), f[3].parse().unwrap()))
        .unwrap()
}

fn values_of(csv: &str) -> Vec<f64> {
    csv.lines().skip(1).map(|l| l.split(',').nth(3).unwrap().parse().unwrap()).collect()
}

#[test]
fn bound_curve_marks_the_four_minima() {
    let dir = tempfile::tempdir().unwrap();
    let o = qcslab(&["bound-curve", "--isnr", "35,20,10,5", "--bits", "2..12", "--out", out_arg(dir.path())], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for (isnr, b) in [("35", 7), ("20", 5), ("10", 2), ("5", 2)] {
        let csv = fs::read_to_string(dir.path().join(format!("bound_isnr_{isnr}.csv"))).unwrap();
        assert_eq!(csv.lines().count(), 12);
        assert_eq!(minimum_of(&csv).0, b, "ISNR {isnr}");
        let svg = fs::read_to_string(dir.path().join(format!("bound_isnr_{isnr}.svg"))).unwrap();
        assert_eq!(svg.matches("<circle").count(), 1);
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(stdout(&o).contains(&format!("ISNR {isnr} dB: optimal B = {b}")));
    }
}

#[test]
fn single_point_curve_is_its_own_minimum() {
    let dir = tempfile::tempdir().unwrap();
    let o = qcslab(&["bound-curve", "--isnr", "20", "--bits", "5..5", "--out", out_arg(dir.path())], &[]);
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("bound_isnr_20.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert_eq!(minimum_of(&csv).0, 5);
}

#[test]
fn full_mode_without_correlation_scales_the_inner_term() {
    let dir = tempfile::tempdir().unwrap();
    let inner = dir.path().join("inner");
    let full = dir.path().join("full");
    let a = qcslab(&["bound-curve", "--isnr", "35", "--out", inner.to_str().unwrap()], &[]);
    let b = qcslab(
        &["bound-curve", "--isnr", "35", "--mode", "full", "--delta", "0.3", "--corr-s", "0", "--out", full.to_str().unwrap()],
        &[],
    );
    assert_eq!((a.status.code(), b.status.code()), (Some(0), Some(0)));
    let vi = values_of(&fs::read_to_string(inner.join("bound_isnr_35.csv")).unwrap());
    let vf = values_of(&fs::read_to_string(full.join("bound_isnr_35.csv")).unwrap());
    // Defaults: K = 10, budget = 3N = 3000.
    let scale = 2.0 * 10.0 / (3000.0 * 0.7);
    assert_eq!(vi.len(), vf.len());
    for (i, f) in vi.iter().zip(&vf) {
        assert!((f - i * scale).abs() <= 1e-12 * f.abs(), "{f} vs {}", i * scale);
    }
}

#[test]
fn presets_are_listed() {
    let o = qcslab(&["presets", "list"], &[]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for name in ["fig1", "fig2", "fig3", "fig4", "ci", "fig3-k60"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name} missing from\n{text}");
    }
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path());
    assert_eq!(qcslab(&["bound-curve", "--bits", "12..2", "--out", out], &[]).status.code(), Some(1));
    assert_eq!(qcslab(&["bound-curve", "--bits", "1..4", "--out", out], &[]).status.code(), Some(1));
    assert_eq!(qcslab(&["bound-curve", "--mode", "half"], &[]).status.code(), Some(1));
    assert_eq!(qcslab(&["frobnicate"], &[]).status.code(), Some(1));
    assert_eq!(qcslab(&["sweep", "--out", out], &[]).status.code(), Some(1));
    assert_eq!(qcslab(&["sweep", "--preset", "fig1", "--out", out], &[]).status.code(), Some(1));
    assert_eq!(qcslab(&["sweep", "--config", "/nonexistent.json"], &[]).status.code(), Some(1));
    assert_eq!(qcslab(&["presets", "list"], &[("QCSLAB_THREADS", "zero")]).status.code(), Some(1));
    assert_eq!(qcslab(&["--help"], &[]).status.code(), Some(0));
}

#[test]
fn config_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, r#"{"n": 64, "k": 2, "budgets": ["2N"], "bit_grid": [1, 4], "isnr_list": [20]}"#).unwrap();
    let o = qcslab(&["sweep", "--config", cfg.to_str().unwrap(), "--out", out_arg(dir.path())], &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("trials"));
}

fn small_config(dir: &Path) -> String {
    let cfg = dir.join("small.json");
    fs::write(
        &cfg,
        r#"{"n": 64, "k": 2, "budgets": ["1N", "2N"], "bit_grid": [1, 3, 6], "isnr_list": [30, 10],
            "trials": 3, "algorithms": ["oracle_ls", "bpdn", "biht_l1", "biht_l2"]}"#,
    )
    .unwrap();
    cfg.to_str().unwrap().to_string()
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn sweep_outputs_are_reproducible_across_runs_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let run = |name: &str, threads: &str| {
        let out = dir.path().join(name);
        let o = qcslab(
            &["sweep", "--config", &cfg, "--trials", "1", "--seed", "7", "--out", out.to_str().unwrap()],
            &[("QCSLAB_THREADS", threads)],
        );
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        files(&out)
    };
    let a = run("a", "1");
    let b = run("b", "1");
    let c = run("c", "4");
    assert_eq!(a, b);
    assert_eq!(a, c);
    let names: Vec<&str> = a.iter().map(|(n, _)| n.as_str()).collect();
    for expected in ["results.csv", "aggregates.csv", "issues.csv", "rsnr_vs_budget_isnr_30.svg", "rsnr_vs_budget_isnr_10.svg"] {
        assert!(names.contains(&expected), "{names:?}");
    }
    let results = String::from_utf8(a.iter().find(|(n, _)| n == "results.csv").unwrap().1.clone()).unwrap();
    assert!(results.starts_with(
        "n,k,budget,bit_depth,m,isnr_db,algorithm,trial,rsnr_db,recon_mse,hamming,wall_time_ms,seed\n"
    ));
    // 2 budgets x 2 ISNR x (2 BIHT at B=1 + 2 multi-bit algorithms at B=3, 6), one trial each.
    assert_eq!(results.lines().count() - 1, 2 * 2 * (2 + 2 * 2));
    let aggs = String::from_utf8(a.iter().find(|(n, _)| n == "aggregates.csv").unwrap().1.clone()).unwrap();
    assert!(aggs.starts_with("n,k,budget,bit_depth,m,isnr_db,algorithm,trials,rsnr_mean,rsnr_median,rsnr_std\n"));

    let other_seed = dir.path().join("d");
    qcslab(&["sweep", "--config", &cfg, "--trials", "1", "--seed", "8", "--out", other_seed.to_str().unwrap()], &[]);
    assert_ne!(a, files(&other_seed));
}

#[test]
fn single_budget_sweep_plots_error_against_bits() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out = dir.path().join("o");
    let o = qcslab(
        &["sweep", "--config", &cfg, "--budget", "3N", "--bits", "2..4", "--isnr", "20", "--out", out.to_str().unwrap()],
        &[],
    );
    assert_eq!(o.status.code(), Some(0));
    let svg = fs::read_to_string(out.join("error_vs_bits_isnr_20.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 2);
    assert_eq!(svg.matches("<circle").count(), 2);
}

#[test]
fn regime_map_with_one_isnr_has_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out = dir.path().join("r");
    let o = qcslab(
        &["regime-map", "--config", &cfg, "--budget", "2N", "--isnr", "15", "--out", out.to_str().unwrap()],
        &[],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("regime_map.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "budget,isnr_db,best_b,best_m,m_over_n,best_rsnr,algorithm,regime");
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("128,15,"));
    let svg = fs::read_to_string(out.join("regime_map_budget_128.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 2);
}

#[test]
fn partial_and_total_failures_have_their_own_codes() {
    let dir = tempfile::tempdir().unwrap();
    // A tight frame needs M <= N; at B = 1 the budget gives M = 2N.
    let cfg = dir.path().join("tf.json");
    fs::write(
        &cfg,
        r#"{"n": 32, "k": 2, "budgets": ["2N"], "bit_grid": [1, 4], "isnr_list": [20], "trials": 2,
            "matrix_kind": "tight_frame", "algorithms": ["biht_l1", "bpdn"]}"#,
    )
    .unwrap();
    let out = dir.path().join("p");
    let o = qcslab(&["sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(3));
    let issues = fs::read_to_string(out.join("issues.csv")).unwrap();
    assert_eq!(issues.lines().filter(|l| l.contains(",failed,")).count(), 2);

    let o = qcslab(&["sweep", "--config", cfg.to_str().unwrap(), "--bits", "1", "--out", out.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn ci_preset_finishes_within_five_minutes() {
    let dir = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let o = qcslab(&["regime-map", "--preset", "ci", "--out", out_arg(dir.path())], &[]);
    let elapsed = start.elapsed();
    assert_eq!(o.status.code(), Some(0));
    assert!(elapsed.as_secs() < 300, "{elapsed:?}");
    let csv = fs::read_to_string(dir.path().join("regime_map.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
}
