//! Named parameter sets `fig1`..`fig4`, `fig3-k60` and a reduced `ci` scale.

use super::{Algorithm, Budget, ExperimentConfig, QuantizerKind};

/// Parameters of a bound-curve preset.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundPreset {
    pub n: usize,
    pub k: usize,
    pub sigma_x2: f64,
    pub budget: Budget,
    pub isnr_list: Vec<f64>,
    pub b_min: u32,
    pub b_max: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PresetKind {
    Bound(BoundPreset),
    Sweep(ExperimentConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub kind: PresetKind,
}

pub const NAMES: [&str; 6] = ["fig1", "fig2", "fig3", "fig4", "ci", "fig3-k60"];

const FIG_ISNR: [f64; 4] = [35.0, 20.0, 10.0, 5.0];

fn fig3(k: usize) -> ExperimentConfig {
    let budgets = [0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0].map(Budget::TimesN).to_vec();
    let mut cfg = ExperimentConfig::new(1000, k, budgets, vec![1, 2, 4, 6, 8, 10, 12], FIG_ISNR.to_vec(), 100);
    cfg.algorithms = vec![Algorithm::Bpdn, Algorithm::BihtL1, Algorithm::BihtL2];
    cfg
}

pub fn get(name: &str) -> Option<Preset> {
    let (description, kind) = match name {
        "fig1" => (
            "bound curves at N=1000, K=10, budget 3N, B in 2..12",
            PresetKind::Bound(BoundPreset {
                n: 1000,
                k: 10,
                sigma_x2: 1.0,
                budget: Budget::TimesN(3.0),
                isnr_list: FIG_ISNR.to_vec(),
                b_min: 2,
                b_max: 12,
            }),
        ),
        "fig2" => {
            let mut cfg =
                ExperimentConfig::new(1000, 10, vec![Budget::TimesN(3.0)], (2..=12).collect(), FIG_ISNR.to_vec(), 100);
            cfg.algorithms = vec![Algorithm::OracleLs];
            cfg.quantizer = QuantizerKind::Uniform;
            ("oracle least squares, N=1000, K=10, budget 3N, B in 2..12", PresetKind::Sweep(cfg))
        }
        "fig3" => ("BPDN and BIHT, N=1000, K=10, budgets N/2..7N", PresetKind::Sweep(fig3(10))),
        "fig3-k60" => ("as fig3 with K=60", PresetKind::Sweep(fig3(60))),
        "fig4" => {
            let budgets = vec![Budget::TimesN(1.0), Budget::TimesN(2.0), Budget::TimesN(5.0)];
            let isnr = (0..=20).map(|i| 5.0 + 2.0 * i as f64).collect();
            let mut cfg = ExperimentConfig::new(1000, 10, budgets, (1..=12).collect(), isnr, 100);
            cfg.algorithms = vec![Algorithm::Bpdn, Algorithm::BihtL1, Algorithm::BihtL2];
            ("best (M, B) per ISNR in 5..45 dB, budgets N, 2N, 5N", PresetKind::Sweep(cfg))
        }
        "ci" => {
            let mut cfg =
                ExperimentConfig::new(256, 4, vec![Budget::TimesN(2.0)], (1..=8).collect(), FIG_ISNR.to_vec(), 30);
            cfg.algorithms = vec![Algorithm::Bpdn, Algorithm::BihtL1, Algorithm::BihtL2];
            ("reduced scale N=256, K=4, 30 trials, budget 2N", PresetKind::Sweep(cfg))
        }
        _ => return None,
    };
    let name = NAMES.iter().find(|n| **n == name)?;
    Some(Preset { name, description, kind })
}

pub fn all() -> Vec<Preset> {
    NAMES.iter().filter_map(|n| get(n)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_sweep_preset_validates() {
        assert_eq!(all().len(), NAMES.len());
        for p in all() {
            if let PresetKind::Sweep(cfg) = &p.kind {
                cfg.validate().unwrap_or_else(|e| panic!("{}: {e}", p.name));
            }
        }
        assert!(get("fig9").is_none());
    }

    #[test]
    fn ci_preset_is_reduced_scale() {
        let Some(Preset { kind: PresetKind::Sweep(cfg), .. }) = get("ci") else { panic!() };
        assert_eq!((cfg.n, cfg.k, cfg.trials), (256, 4, 30));
    }
}
