use std::fmt;
use std::path::Path;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::signal::MatrixKind;

/// A bit budget, either absolute or as a multiple of `N` (`"3N"`, `"0.5N"`,
/// or equivalently `"x3"`, `"x0.5"`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Budget {
    Absolute(u64),
    TimesN(f64),
}

impl Budget {
    /// Total bits for ambient dimension `n`, rounded down.
    pub fn resolve(&self, n: usize) -> u64 {
        match *self {
            Budget::Absolute(b) => b,
            Budget::TimesN(f) => (f * n as f64 + 1e-9).floor() as u64,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::invalid(format!("bad budget `{s}`: expected an integer or a multiple like `3N`"));
        if let Some(mult) = s.strip_suffix(['N', 'n']).or_else(|| s.strip_prefix('x')) {
            let f = if mult.is_empty() { 1.0 } else { mult.parse::<f64>().map_err(|_| bad())? };
            if !(f > 0.0) || !f.is_finite() {
                return Err(bad());
            }
            Ok(Budget::TimesN(f))
        } else {
            s.parse::<u64>().map(Budget::Absolute).map_err(|_| bad())
        }
    }
}

impl fmt::Display for Budget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Budget::Absolute(b) => write!(f, "{b}"),
            Budget::TimesN(m) => write!(f, "{m}N"),
        }
    }
}

impl Serialize for Budget {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Budget::Absolute(b) => s.serialize_u64(*b),
            Budget::TimesN(_) => s.serialize_str(&self.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for Budget {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Budget;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a positive integer or a multiple of N such as \"3N\"")
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Budget, E> {
                Ok(Budget::Absolute(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Budget, E> {
                u64::try_from(v).map(Budget::Absolute).map_err(|_| E::custom("budget must be positive"))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Budget, E> {
                Budget::parse(v).map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

/// Input SNR in dB; `+inf` means no signal noise. Serialized as a number or
/// the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Isnr(pub f64);

impl Serialize for Isnr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Isnr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Isnr;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an ISNR in dB or \"inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Isnr, E> {
                Ok(Isnr(v))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Isnr, E> {
                Ok(Isnr(v as f64))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Isnr, E> {
                Ok(Isnr(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Isnr, E> {
                match v.trim() {
                    "inf" | "+inf" | "Infinity" => Ok(Isnr(f64::INFINITY)),
                    other => other.parse().map(Isnr).map_err(|_| E::custom("expected a number or \"inf\"")),
                }
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    OracleLs,
    Bpdn,
    BihtL1,
    BihtL2,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::OracleLs => "oracle_ls",
            Algorithm::Bpdn => "bpdn",
            Algorithm::BihtL1 => "biht_l1",
            Algorithm::BihtL2 => "biht_l2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "oracle_ls" => Some(Algorithm::OracleLs),
            "bpdn" => Some(Algorithm::Bpdn),
            "biht_l1" => Some(Algorithm::BihtL1),
            "biht_l2" => Some(Algorithm::BihtL2),
            _ => None,
        }
    }

    /// Sign-measurement algorithms run at `B = 1`, the others at `B > 1`.
    pub fn is_one_bit(&self) -> bool {
        matches!(self, Algorithm::BihtL1 | Algorithm::BihtL2)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Quantizer used for `B > 1`; `B = 1` always uses the sign quantizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuantizerKind {
    /// Midrise uniform over `[-T, T]` with `T = ‖Φx‖∞`.
    #[default]
    Uniform,
    /// Lloyd-Max designed for a Gaussian with the measurement variance
    /// `(Kσ_x² + Nσ_n²)/M`.
    LloydMax,
    /// Skip quantization entirely (reference path).
    Unquantized,
}

fn default_sigma_x2() -> f64 {
    1.0
}

fn default_algorithms() -> Vec<Algorithm> {
    vec![Algorithm::Bpdn, Algorithm::BihtL1, Algorithm::BihtL2]
}

fn default_bpdn_max_iter() -> usize {
    2000
}

fn default_biht_max_iter() -> usize {
    100
}

fn default_biht_step() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    pub k: usize,
    #[serde(default = "default_sigma_x2")]
    pub sigma_x2: f64,
    pub budgets: Vec<Budget>,
    pub bit_grid: Vec<u32>,
    pub isnr_list: Vec<Isnr>,
    pub trials: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<Algorithm>,
    #[serde(default = "default_matrix_kind")]
    pub matrix_kind: MatrixKind,
    #[serde(default)]
    pub quantizer: QuantizerKind,
    #[serde(default = "default_bpdn_max_iter")]
    pub bpdn_max_iter: usize,
    #[serde(default = "default_biht_max_iter")]
    pub biht_max_iter: usize,
    #[serde(default = "default_biht_step")]
    pub biht_step: f64,
    /// Measure per-solve wall time. Off by default because it makes output
    /// non-reproducible.
    #[serde(default)]
    pub record_timing: bool,
}

fn default_matrix_kind() -> MatrixKind {
    MatrixKind::IidGaussian
}

impl ExperimentConfig {
    /// Config with the crate defaults for every optional field.
    pub fn new(n: usize, k: usize, budgets: Vec<Budget>, bit_grid: Vec<u32>, isnr_list: Vec<f64>, trials: usize) -> Self {
        Self {
            n,
            k,
            sigma_x2: default_sigma_x2(),
            budgets,
            bit_grid,
            isnr_list: isnr_list.into_iter().map(Isnr).collect(),
            trials,
            master_seed: 0,
            algorithms: default_algorithms(),
            matrix_kind: default_matrix_kind(),
            quantizer: QuantizerKind::default(),
            bpdn_max_iter: default_bpdn_max_iter(),
            biht_max_iter: default_biht_max_iter(),
            biht_step: default_biht_step(),
            record_timing: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let field = |path: &str, message: String| Err(Error::Config { path: path.into(), message });
        if self.n == 0 {
            return field("n", "must be positive".into());
        }
        if self.k == 0 || self.k > self.n {
            return field("k", format!("must satisfy 1 <= k <= n = {}", self.n));
        }
        if !(self.sigma_x2 > 0.0) {
            return field("sigma_x2", "must be positive".into());
        }
        if self.trials == 0 {
            return field("trials", "must be at least 1".into());
        }
        if self.budgets.is_empty() {
            return field("budgets", "must not be empty".into());
        }
        if self.bit_grid.is_empty() {
            return field("bit_grid", "must not be empty".into());
        }
        if self.isnr_list.is_empty() {
            return field("isnr_list", "must not be empty".into());
        }
        if self.algorithms.is_empty() {
            return field("algorithms", "must not be empty".into());
        }
        for (i, b) in self.bit_grid.iter().enumerate() {
            if *b == 0 || *b > crate::quantize::MAX_BITS {
                return field(&format!("bit_grid[{i}]"), format!("bit-depth {b} outside 1..=32"));
            }
        }
        for (i, s) in self.isnr_list.iter().enumerate() {
            if s.0.is_nan() || s.0 == f64::NEG_INFINITY {
                return field(&format!("isnr_list[{i}]"), "must be a number or \"inf\"".into());
            }
        }
        for (i, budget) in self.budgets.iter().enumerate() {
            let total = budget.resolve(self.n);
            for b in &self.bit_grid {
                if total / (*b as u64) < 1 {
                    return field(
                        &format!("budgets[{i}]"),
                        format!("budget {total} leaves no measurement at bit-depth {b}"),
                    );
                }
            }
        }
        if self.bpdn_max_iter == 0 || self.biht_max_iter == 0 || !(self.biht_step > 0.0) {
            return field("solver", "iteration limits and step must be positive".into());
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            let message = inner.to_string();
            // Missing fields are reported against the parent; name the field.
            let path = match (path.as_str(), missing_field(&message)) {
                (".", Some(f)) => f.to_string(),
                (p, Some(f)) => format!("{p}.{f}"),
                (p, None) => p.to_string(),
            };
            Error::Config { path, message }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

fn missing_field(message: &str) -> Option<&str> {
    let rest = message.strip_prefix("missing field `")?;
    rest.split('`').next()
}

/// Reads and validates a JSON experiment config.
pub fn read_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    ExperimentConfig::from_json(&text)
}
