//! `projexp`: estimate matrix exponentials from rank-one projection
//! integrals and check the supporting identities.
//!
//! Exit codes: 0 pass, 1 numeric tolerance failure, 2 usage or input error.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "projexp", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo exp(A) or exp(iA) for a matrix file, checked against the
    /// spectral oracle.
    Expm(ExpmArgs),
    /// Exact and sampled angular moments Av((Tr AW)^k W) for one dimension.
    VerifyMoments(MomentArgs),
    /// Large-s Laplace behaviour for A = diag(1, lambda1, lambda2).
    Asymptotics(AsymptoticArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SamplingArgs {
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 4)]
    pub shards: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Exp,
    Fourier,
}

#[derive(Debug, Args)]
pub struct ExpmArgs {
    /// Matrix JSON: {"dim": d, "re": [[...]], "im": [[...]]}.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[arg(long, value_enum, default_value_t = Mode::Exp)]
    pub mode: Mode,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MomentArgs {
    #[arg(long)]
    pub dim: usize,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AsymptoticArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub lambda1: f64,
    /// Defaults to -1 - lambda1.
    #[arg(long, allow_negative_numbers = true)]
    pub lambda2: Option<f64>,
    /// Comma-separated, strictly increasing, positive.
    #[arg(long = "s", value_delimiter = ',', default_value = "5,10,20,40")]
    pub s_list: Vec<f64>,
    /// Coefficients c0,c1,... of the weight P(x) = sum c_k x^k, x = Tr(AW).
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "1",
        allow_negative_numbers = true
    )]
    pub weight: Vec<f64>,
    #[arg(long, default_value_t = projexp::asymptotics::DEFAULT_QUAD_ORDER)]
    pub quad_order: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// CSV rows (s,computed,predicted,ratio). Defaults to the --out path with
    /// a .csv extension; omitted when neither is given.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let argv: Vec<String> = std::env::args().collect();
    match commands::run(&cli, &argv) {
        Ok(outcome) => {
            eprintln!("{}", outcome.summary);
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
