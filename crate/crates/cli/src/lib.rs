//! Command-line driver for `weakval`. Every command writes CSV.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod error;

pub use commands::{
    COMPUTE_HEADER, POINTER_HEADER, SWEEP_ALPHA_HEADER, SWEEP_G_HEADER, SWEEP_THETA_HEADER,
};
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "weakval", version, about = "Weak values and post-selection probabilities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Weak values, probabilities and estimators for one experiment.
    Compute(ComputeArgs),
    /// Sweep a component parameter or the meter strength.
    Sweep(SweepArgs),
    /// Gaussian pointer coupled to a path projector.
    Pointer(PointerArgs),
    /// CNOT meter-qubit statistics at one strength.
    Meter(MeterArgs),
    /// Per-trial photon-counting Monte Carlo.
    Shots(ShotsArgs),
    /// Reference readout and estimator tables for the canonical instance.
    Fig3(Fig3Args),
}

#[derive(Debug, Args)]
pub struct ComputeArgs {
    /// Experiment file in `.wvx` format.
    pub input: PathBuf,
    /// Output file; stdout if omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepParam {
    Alpha,
    Theta,
    #[value(name = "G")]
    G,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    pub input: PathBuf,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_name = "NAME")]
    pub param: SweepParam,
    #[arg(long, value_name = "X", allow_negative_numbers = true)]
    pub from: f64,
    #[arg(long, value_name = "Y", allow_negative_numbers = true)]
    pub to: f64,
    #[arg(long, value_name = "K")]
    pub steps: usize,
    /// Expected baseline counts behind the sigma column.
    #[arg(long = "n-ref", value_name = "N", default_value_t = weakval::shotnoise::FIG3_N_REF_MEAN)]
    pub n_ref: f64,
}

#[derive(Debug, Args)]
pub struct PointerArgs {
    pub input: PathBuf,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Path whose projector couples to the pointer; defaults to 1 (0 in dim 1).
    #[arg(long, value_name = "K")]
    pub path: Option<usize>,
    #[arg(long = "G", value_name = "X", default_value_t = 0.01, allow_negative_numbers = true)]
    pub g: f64,
    #[arg(long, value_name = "X", default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, value_name = "N", default_value_t = weakval::pointer::DEFAULT_GRID_POINTS)]
    pub grid: usize,
    /// Also write the post-selected position density here.
    #[arg(long, value_name = "PATH")]
    pub density: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MeterArgs {
    pub input: PathBuf,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long = "G", value_name = "X")]
    pub g: f64,
}

#[derive(Debug, Args)]
pub struct ShotsArgs {
    pub input: PathBuf,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_name = "N", default_value_t = 0)]
    pub seed: u64,
    #[arg(long = "n-ref", value_name = "N", default_value_t = weakval::shotnoise::FIG3_N_REF_MEAN)]
    pub n_ref: f64,
    #[arg(long, value_name = "N", default_value_t = 1000)]
    pub trials: usize,
    /// Count through a meter qubit of this strength instead of the file's component.
    #[arg(long = "G", value_name = "X")]
    pub g: Option<f64>,
}

#[derive(Debug, Args)]
pub struct Fig3Args {
    /// Directory receiving fig3a.csv and fig3b.csv.
    #[arg(long, value_name = "PATH", default_value = ".")]
    pub out: PathBuf,
    #[arg(long, value_name = "N", default_value_t = 0)]
    pub seed: u64,
    #[arg(long = "n-ref", value_name = "N", default_value_t = weakval::shotnoise::FIG3_N_REF_MEAN)]
    pub n_ref: f64,
    /// Monte Carlo trials per row; 0 leaves out the Monte Carlo columns.
    #[arg(long, value_name = "N", default_value_t = 0)]
    pub trials: usize,
    #[arg(long, value_name = "N", default_value_t = 61)]
    pub points: usize,
}

/// Runs one command. CSV goes to `--out` or `stdout`, notices to `stderr`.
pub fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let mut notes = Vec::new();
    let (out, text) = match &cli.command {
        Command::Compute(a) => (&a.out, commands::compute(a, &mut notes)?),
        Command::Sweep(a) => (&a.out, commands::sweep(a, &mut notes)?),
        Command::Pointer(a) => (&a.out, commands::pointer(a, &mut notes)?),
        Command::Meter(a) => (&a.out, commands::meter(a)?),
        Command::Shots(a) => (&a.out, commands::shots(a, &mut notes)?),
        Command::Fig3(a) => {
            commands::fig3(a, &mut notes)?;
            (&None, String::new())
        }
    };
    for n in &notes {
        // Notices are advisory; a closed stderr is not worth failing over.
        let _ = writeln!(stderr, "note: {n}");
    }
    match out {
        Some(path) => write_file(path, &text),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io("<stdout>", e)),
    }
}

pub(crate) fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}
