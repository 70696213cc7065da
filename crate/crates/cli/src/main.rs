mod commands;
mod grammar;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::{CliError, Outcome};

#[derive(Parser)]
#[command(name = "qcslab", version, about = "Measurement count vs. bit-depth experiments for quantized compressive sensing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the oracle error bound over a bit-depth grid.
    BoundCurve(BoundArgs),
    /// Run a Monte-Carlo sweep and write per-trial and aggregate tables.
    Sweep(SweepArgs),
    /// Find the RSNR-optimal (M, B) pair per ISNR at a fixed budget.
    RegimeMap(SweepArgs),
    /// Built-in parameter sets.
    Presets {
        #[command(subcommand)]
        action: PresetsAction,
    },
}

#[derive(Subcommand)]
enum PresetsAction {
    List,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Inner,
    Full,
}

const PRESETS: [&str; 6] = qcs_core::harness::presets::NAMES;

#[derive(Args)]
pub struct BoundArgs {
    /// Experiment config to take N, K, sigma_x2 and defaults from.
    #[arg(long, conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(PRESETS))]
    pub preset: Option<String>,
    /// Comma list of ISNR values in dB.
    #[arg(long)]
    pub isnr: Option<String>,
    /// Bit-depth grid, e.g. `2..12`.
    #[arg(long)]
    pub bits: Option<String>,
    /// Total bits, absolute or as a multiple of N (`3N`).
    #[arg(long)]
    pub budget: Option<String>,
    #[arg(long, value_enum, default_value = "inner")]
    pub mode: ModeArg,
    /// RIP constant used in full mode.
    #[arg(long, default_value_t = 0.0)]
    pub delta: f64,
    /// Measurement correlation term used in full mode.
    #[arg(long = "corr-s", default_value_t = 0.0)]
    pub corr_s: f64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct SweepArgs {
    /// JSON experiment config.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    pub config: Option<PathBuf>,
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(PRESETS))]
    pub preset: Option<String>,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Trials per tuple.
    #[arg(long)]
    pub trials: Option<usize>,
    /// ISNR list in dB: `35,20,10`, `5..45` or `inf`.
    #[arg(long)]
    pub isnr: Option<String>,
    /// Bit-depth grid: `1,2,4` or `1..12`.
    #[arg(long)]
    pub bits: Option<String>,
    /// Comma list of budgets, absolute or multiples of N.
    #[arg(long)]
    pub budget: Option<String>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("QCSLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Usage(format!("QCSLAB_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Runtime(e.to_string()))
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    configure_threads()?;
    match cli.command {
        Command::BoundCurve(a) => commands::bound_curve(&a),
        Command::Sweep(a) => commands::sweep(&a),
        Command::RegimeMap(a) => commands::regime_map(&a),
        Command::Presets { action: PresetsAction::List } => Ok(commands::presets_list()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::Partial(failed)) => {
            eprintln!("warning: {failed} trial(s) failed; see issues.csv");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
