use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use projexp::asymptotics::{
    asymptotic_report, quadratic_identity_residual, AsymptoticReport, ScalarPoly, SpectrumConfig,
};
use projexp::estimator::{estimate, EstimatorConfig, RealMatrix};
use projexp::matcore::{expm_reference, CMatrix, ExpMode, HermitianMatrix, MatrixJson};
use projexp::moments::{verify_moment_table, MomentReport};
use serde::Serialize;

use crate::report::{Provenance, Report, Timing, SCHEMA};
use crate::{AsymptoticArgs, Cli, Command, ExpmArgs, Mode, MomentArgs, SamplingArgs};

pub const EXPM_MAX_Z: f64 = 4.0;
pub const EXPM_MAX_REL_ERROR: f64 = 0.05;
pub const IDENTITY_RESIDUAL_TOL: f64 = 1e-12;
pub const RATIO_TOL: f64 = 0.10;

#[derive(Debug)]
pub enum CliError {
    Core(projexp::Error),
    Io(PathBuf, std::io::Error),
    InvalidJson(PathBuf, serde_json::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(p, e) => write!(f, "Io: {}: {e}", p.display()),
            CliError::InvalidJson(p, e) => write!(f, "InvalidJson: {}: {e}", p.display()),
        }
    }
}

impl From<projexp::Error> for CliError {
    fn from(e: projexp::Error) -> Self {
        CliError::Core(e)
    }
}

pub struct Outcome {
    pub passed: bool,
    pub summary: String,
}

pub fn run(cli: &Cli, argv: &[String]) -> Result<Outcome, CliError> {
    let started = Instant::now();
    match &cli.command {
        Command::Expm(args) => expm(args, argv, started),
        Command::VerifyMoments(args) => verify_moments(args, argv, started),
        Command::Asymptotics(args) => asymptotics(args, argv, started),
    }
}

fn provenance(argv: &[String], sampling: Option<&SamplingArgs>) -> Provenance {
    Provenance {
        library_version: projexp::VERSION,
        command_line: argv.iter().skip(1).cloned().collect(),
        seed: sampling.map(|s| s.seed),
        samples: sampling.map(|s| s.samples),
        shards: sampling.map(|s| s.shards),
    }
}

fn config(s: &SamplingArgs) -> EstimatorConfig {
    EstimatorConfig::new(s.samples, s.seed, s.shards)
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn emit<T: Serialize>(
    command: &'static str,
    provenance: Provenance,
    passed: bool,
    result: T,
    started: Instant,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let report = Report {
        schema: SCHEMA,
        command,
        provenance,
        passed,
        result,
        timing: Timing {
            wall_seconds: started.elapsed().as_secs_f64(),
        },
    };
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    match out {
        Some(path) => write_text(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn read_matrix(path: &Path) -> Result<HermitianMatrix, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
    let json: MatrixJson =
        serde_json::from_str(&text).map_err(|e| CliError::InvalidJson(path.to_path_buf(), e))?;
    Ok(HermitianMatrix::new(json.to_matrix()?)?)
}

#[derive(Serialize)]
struct Thresholds {
    max_z: f64,
    max_relative_error: f64,
}

#[derive(Serialize)]
struct ExpmResult {
    input: CMatrix,
    mode: ExpMode,
    oracle: CMatrix,
    estimate: CMatrix,
    stderr: RealMatrix,
    z_scores: RealMatrix,
    max_z: f64,
    relative_error: f64,
    thresholds: Thresholds,
}

fn expm(args: &ExpmArgs, argv: &[String], started: Instant) -> Result<Outcome, CliError> {
    let a = read_matrix(&args.input)?;
    let mode = match args.mode {
        Mode::Exp => ExpMode::Exp,
        Mode::Fourier => ExpMode::Fourier,
    };
    let est = estimate(&a, mode, &config(&args.sampling))?;
    let oracle = expm_reference(&a, mode)?;
    let max_z = est.max_z(&oracle);
    let relative_error = est.relative_error(&oracle);
    let passed = max_z <= EXPM_MAX_Z && relative_error <= EXPM_MAX_REL_ERROR;
    let summary = format!(
        "expm: {} max_z={max_z:.3} relative_error={relative_error:.3e}",
        verdict(passed)
    );
    let result = ExpmResult {
        input: *a.matrix(),
        mode,
        oracle,
        z_scores: est.z_scores(&oracle),
        estimate: est.mean,
        stderr: est.stderr,
        max_z,
        relative_error,
        thresholds: Thresholds {
            max_z: EXPM_MAX_Z,
            max_relative_error: EXPM_MAX_REL_ERROR,
        },
    };
    let prov = provenance(argv, Some(&args.sampling));
    emit("expm", prov, passed, result, started, args.out.as_deref())?;
    Ok(Outcome { passed, summary })
}

fn verify_moments(
    args: &MomentArgs,
    argv: &[String],
    started: Instant,
) -> Result<Outcome, CliError> {
    let report: MomentReport = verify_moment_table(args.dim, &config(&args.sampling))?;
    let passed = report.passed;
    let summary = if passed {
        format!(
            "verify-moments: PASS d={} ({} identities)",
            args.dim,
            report.checks.len()
        )
    } else {
        format!(
            "verify-moments: FAIL d={} MomentMismatch: {}",
            args.dim,
            report.failures().join(", ")
        )
    };
    let prov = provenance(argv, Some(&args.sampling));
    emit(
        "verify-moments",
        prov,
        passed,
        &report,
        started,
        args.out.as_deref(),
    )?;
    Ok(Outcome { passed, summary })
}

#[derive(Serialize)]
struct AsymptoticResult<'a> {
    #[serde(flatten)]
    report: &'a AsymptoticReport,
    identity_residual: f64,
    final_ratio: f64,
    monotone: bool,
    thresholds: AsymptoticThresholds,
}

#[derive(Serialize)]
struct AsymptoticThresholds {
    identity_residual: f64,
    final_ratio_deviation: f64,
}

fn asymptotics(
    args: &AsymptoticArgs,
    argv: &[String],
    started: Instant,
) -> Result<Outcome, CliError> {
    let spectrum = match args.lambda2 {
        Some(l2) => SpectrumConfig::new(args.lambda1, l2)?,
        None => SpectrumConfig::from_lambda1(args.lambda1)?,
    };
    let weight = ScalarPoly(args.weight.clone());
    let report = asymptotic_report(&spectrum, &args.s_list, &weight, args.quad_order)?;
    let identity_residual = quadratic_identity_residual(&spectrum);
    let final_ratio = report.final_ratio();
    let passed =
        identity_residual <= IDENTITY_RESIDUAL_TOL && (final_ratio - 1.0).abs() <= RATIO_TOL;
    let summary = format!(
        "asymptotics: {} final_ratio={final_ratio:.6} identity_residual={identity_residual:.1e}",
        verdict(passed)
    );

    let csv_path = args
        .csv
        .clone()
        .or_else(|| args.out.as_ref().map(|p| p.with_extension("csv")));
    if let Some(path) = &csv_path {
        write_text(path, &report.to_csv())?;
    }

    let result = AsymptoticResult {
        report: &report,
        identity_residual,
        final_ratio,
        monotone: report.monotone(),
        thresholds: AsymptoticThresholds {
            identity_residual: IDENTITY_RESIDUAL_TOL,
            final_ratio_deviation: RATIO_TOL,
        },
    };
    emit(
        "asymptotics",
        provenance(argv, None),
        passed,
        result,
        started,
        args.out.as_deref(),
    )?;
    Ok(Outcome { passed, summary })
}

fn verdict(passed: bool) -> &'static str {
    if passed {
        "PASS"
    } else {
        "FAIL"
    }
}
