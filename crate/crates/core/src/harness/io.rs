use std::path::Path;

use super::{Aggregate, Algorithm, Issue, RegimeEntry, TrialResult, Tuple};
use crate::error::{Error, Result};

const RESULT_HEADER: [&str; 13] = [
    "n", "k", "budget", "bit_depth", "m", "isnr_db", "algorithm", "trial", "rsnr_db", "recon_mse", "hamming",
    "wall_time_ms", "seed",
];

const AGGREGATE_HEADER: [&str; 11] = [
    "n", "k", "budget", "bit_depth", "m", "isnr_db", "algorithm", "trials", "rsnr_mean", "rsnr_median", "rsnr_std",
];

const ISSUE_HEADER: [&str; 10] = ["n", "k", "budget", "bit_depth", "m", "isnr_db", "algorithm", "trial", "kind", "reason"];

const REGIME_HEADER: [&str; 8] = ["budget", "isnr_db", "best_b", "best_m", "m_over_n", "best_rsnr", "algorithm", "regime"];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn tuple_fields(t: &Tuple) -> [String; 6] {
    [
        t.n.to_string(),
        t.k.to_string(),
        t.budget.to_string(),
        t.bit_depth.to_string(),
        t.m.to_string(),
        t.isnr_db.to_string(),
    ]
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    Ok(csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path)?)
}

/// Per-trial rows with the fixed column order
/// `n, k, budget, bit_depth, m, isnr_db, algorithm, trial, rsnr_db, recon_mse,
/// hamming, wall_time_ms, seed`. Optional fields are written empty.
pub fn write_results(rows: &[TrialResult], path: impl AsRef<Path>) -> Result<()> {
    let mut w = writer(path.as_ref())?;
    w.write_record(RESULT_HEADER)?;
    for r in rows {
        let mut rec: Vec<String> = tuple_fields(&r.tuple).into();
        rec.extend([
            r.algorithm.name().to_string(),
            r.trial.to_string(),
            r.rsnr_db.to_string(),
            r.recon_mse.to_string(),
            opt(r.hamming),
            opt(r.wall_time_ms),
            r.seed.to_string(),
        ]);
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_aggregates(aggs: &[Aggregate], path: impl AsRef<Path>) -> Result<()> {
    let mut w = writer(path.as_ref())?;
    w.write_record(AGGREGATE_HEADER)?;
    for a in aggs {
        let mut rec: Vec<String> = tuple_fields(&a.tuple).into();
        rec.extend([
            a.algorithm.name().to_string(),
            a.trials.to_string(),
            a.rsnr_mean.to_string(),
            a.rsnr_median.to_string(),
            a.rsnr_std.to_string(),
        ]);
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Skipped tuples and failed trials with their reasons.
pub fn write_issues(issues: &[Issue], path: impl AsRef<Path>) -> Result<()> {
    let mut w = writer(path.as_ref())?;
    w.write_record(ISSUE_HEADER)?;
    for i in issues {
        let mut rec: Vec<String> = tuple_fields(&i.tuple).into();
        rec.extend([
            i.algorithm.name().to_string(),
            i.trial.map(|t| t.to_string()).unwrap_or_default(),
            i.kind.name().to_string(),
            i.reason.clone(),
        ]);
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_regime_map(entries: &[RegimeEntry], n: usize, path: impl AsRef<Path>) -> Result<()> {
    let mut w = writer(path.as_ref())?;
    w.write_record(REGIME_HEADER)?;
    for e in entries {
        w.write_record([
            e.budget.to_string(),
            e.isnr_db.to_string(),
            e.best_b.to_string(),
            e.best_m.to_string(),
            (e.best_m as f64 / n as f64).to_string(),
            e.best_rsnr.to_string(),
            e.algorithm.name().to_string(),
            e.regime.name().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

struct Fields<'a> {
    rec: &'a csv::StringRecord,
    line: u64,
}

impl Fields<'_> {
    fn raw(&self, i: usize) -> Result<&str> {
        self.rec.get(i).ok_or_else(|| self.err(i, "missing column"))
    }

    fn err(&self, i: usize, msg: &str) -> Error {
        Error::Config { path: format!("line {} column {}", self.line, i + 1), message: msg.into() }
    }

    fn parse<T: std::str::FromStr>(&self, i: usize) -> Result<T> {
        self.raw(i)?.parse().map_err(|_| self.err(i, "unparsable value"))
    }

    fn opt_f64(&self, i: usize) -> Result<Option<f64>> {
        match self.raw(i)? {
            "" => Ok(None),
            _ => self.parse(i).map(Some),
        }
    }

    fn tuple(&self) -> Result<Tuple> {
        Ok(Tuple {
            n: self.parse(0)?,
            k: self.parse(1)?,
            budget: self.parse(2)?,
            bit_depth: self.parse(3)?,
            m: self.parse(4)?,
            isnr_db: self.parse(5)?,
        })
    }

    fn algorithm(&self, i: usize) -> Result<Algorithm> {
        Algorithm::parse(self.raw(i)?).ok_or_else(|| self.err(i, "unknown algorithm"))
    }
}

fn read_rows<T>(path: &Path, header: &[&str], parse: impl Fn(&Fields) -> Result<T>) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    let got: Vec<&str> = r.headers()?.iter().collect();
    if got != header {
        return Err(Error::Config { path: path.display().to_string(), message: format!("unexpected header {got:?}") });
    }
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        out.push(parse(&Fields { rec: &rec, line: i as u64 + 2 })?);
    }
    Ok(out)
}

pub fn read_results(path: impl AsRef<Path>) -> Result<Vec<TrialResult>> {
    read_rows(path.as_ref(), &RESULT_HEADER, |f| {
        Ok(TrialResult {
            tuple: f.tuple()?,
            algorithm: f.algorithm(6)?,
            trial: f.parse(7)?,
            rsnr_db: f.parse(8)?,
            recon_mse: f.parse(9)?,
            hamming: f.opt_f64(10)?,
            wall_time_ms: f.opt_f64(11)?,
            seed: f.parse(12)?,
        })
    })
}

/// Reads an aggregate CSV. `mse_mean` is not stored and comes back as NaN.
pub fn read_aggregates(path: impl AsRef<Path>) -> Result<Vec<Aggregate>> {
    read_rows(path.as_ref(), &AGGREGATE_HEADER, |f| {
        Ok(Aggregate {
            tuple: f.tuple()?,
            algorithm: f.algorithm(6)?,
            trials: f.parse(7)?,
            rsnr_mean: f.parse(8)?,
            rsnr_median: f.parse(9)?,
            rsnr_std: f.parse(10)?,
            mse_mean: f64::NAN,
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{aggregate, run_sweep, Budget, ExperimentConfig};

    #[test]
    fn results_round_trip() {
        let mut cfg = ExperimentConfig::new(48, 2, vec![Budget::TimesN(2.0)], vec![1, 3], vec![15.0, f64::INFINITY], 2);
        cfg.algorithms = vec![Algorithm::OracleLs, Algorithm::BihtL2];
        cfg.record_timing = true;
        let table = run_sweep(&cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        write_results(&table.rows, &p).unwrap();
        let back = read_results(&p).unwrap();
        assert_eq!(back, table.rows);
        let header = std::fs::read_to_string(&p).unwrap();
        assert!(header.starts_with(
            "n,k,budget,bit_depth,m,isnr_db,algorithm,trial,rsnr_db,recon_mse,hamming,wall_time_ms,seed\n"
        ));
        assert!(header.contains(",inf,"));

        let q = dir.path().join("a.csv");
        write_aggregates(&table.aggregates, &q).unwrap();
        let aggs = read_aggregates(&q).unwrap();
        assert_eq!(aggs.len(), aggregate(&back).unwrap().len());
        for (a, b) in aggs.iter().zip(&table.aggregates) {
            assert_eq!((a.tuple, a.algorithm, a.trials, a.rsnr_mean), (b.tuple, b.algorithm, b.trials, b.rsnr_mean));
        }
    }

    #[test]
    fn rejects_foreign_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        std::fs::write(&p, "a,b\n1,2\n").unwrap();
        assert!(read_results(&p).is_err());
    }
}
