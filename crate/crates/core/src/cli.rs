//! Command-line front end.
//!
//! Reports go to stdout as JSON (CSV for curves); diagnostics go to stderr.
//! Exit codes: 0 success, 1 internal failure, 2 malformed input,
//! 3 violated hypothesis, 4 failed check, 5 no certificate found.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::error::Error;
use crate::io::{self, CertificateFile};
use crate::lab::{self, LabFunction, SearchConfig};
use crate::operator::HermitianMatrix;
use crate::report::{digest, Check, RunReport};
use crate::scalar::{DeformationParameter, ScalarEvalConfig};
use crate::state::{self, Direction, FaithfulDensity, ModelConfig};
use crate::verify::{self, Suite, VerifyConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_MALFORMED: i32 = 2;
pub const EXIT_HYPOTHESIS: i32 = 3;
pub const EXIT_CHECK_FAILED: i32 = 4;
pub const EXIT_NO_CERTIFICATE: i32 = 5;

/// Sampled shifts for the quadratic majorant of `N(β)`.
const MAJORANT_BETAS: [f64; 10] = [-4.5, -3.5, -2.5, -1.5, -0.5, 0.5, 1.5, 2.5, 3.5, 4.5];

#[derive(Debug, Parser)]
#[command(name = "deformexp", version, about = "Deformed exponential families of states on matrix algebras")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for the normalization alpha and check its bounds.
    Alpha(AlphaArgs),
    /// Sample the curve t -> omega_t as CSV.
    Geodesic(GeodesicArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
    /// Search for matrices violating operator monotonicity.
    Counterexample(CounterexampleArgs),
}

#[derive(Debug, clap::Args)]
pub struct ModelArgs {
    /// Density matrix (JSON matrix file).
    #[arg(long)]
    pub rho: PathBuf,
    /// Direction K (JSON matrix file).
    #[arg(long)]
    pub k: PathBuf,
    /// Deformation parameter lambda.
    #[arg(long, env = "DEFORM_LAMBDA", default_value_t = 1.0)]
    pub lambda: f64,
    /// Relative tolerance of the scalar inversion.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    /// Replace K by K - tr(rho K) instead of rejecting it.
    #[arg(long)]
    pub center: bool,
}

#[derive(Debug, clap::Args)]
pub struct AlphaArgs {
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, clap::Args)]
pub struct GeodesicArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub t_min: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub t_max: f64,
    /// Number of grid points, at least 2.
    #[arg(long)]
    pub steps: usize,
    /// Observable A whose expectation tr(sigma_t A) becomes a column.
    #[arg(long = "probe")]
    pub probes: Vec<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SuiteArg {
    Scalar,
    Operator,
    State,
    All,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Suite {
        match s {
            SuiteArg::Scalar => Suite::Scalar,
            SuiteArg::Operator => Suite::Operator,
            SuiteArg::State => Suite::State,
            SuiteArg::All => Suite::All,
        }
    }
}

#[derive(Debug, clap::Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub suite: SuiteArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random matrix instances per check.
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FnArg {
    UMinusExpPhi,
    LogExpPhi,
}

impl From<FnArg> for LabFunction {
    fn from(f: FnArg) -> LabFunction {
        match f {
            FnArg::UMinusExpPhi => LabFunction::UMinusExpPhi,
            FnArg::LogExpPhi => LabFunction::LogExpPhi,
        }
    }
}

#[derive(Debug, clap::Args)]
pub struct CounterexampleArgs {
    #[arg(long = "fn", value_enum)]
    pub function: FnArg,
    #[arg(long, env = "DEFORM_LAMBDA", default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Re-validate a previously emitted certificate instead of searching.
    #[arg(long, conflicts_with = "seed")]
    pub check: Option<PathBuf>,
}

/// A failed command: exit code and message for stderr.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            _ if e.is_hypothesis_violation() => EXIT_HYPOTHESIS,
            Error::SearchExhausted { .. } => EXIT_NO_CERTIFICATE,
            Error::NoConvergence { .. } => EXIT_INTERNAL,
            _ => EXIT_MALFORMED,
        };
        let mut message = e.to_string();
        if matches!(e, Error::NotCentered(_)) {
            message.push_str("; pass --center to subtract the mean");
        }
        Failure { code, message }
    }
}

/// Runs a parsed command, writing its report to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<i32, Failure> {
    match &cli.command {
        Command::Alpha(args) => cmd_alpha(args, out),
        Command::Geodesic(args) => cmd_geodesic(args, out),
        Command::Verify(args) => cmd_verify(args, out),
        Command::Counterexample(args) => cmd_counterexample(args, out),
    }
}

fn write_out(out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| Failure::new(EXIT_INTERNAL, format!("cannot write output: {e}")))
}

fn write_report(out: &mut dyn Write, report: &RunReport) -> Result<i32, Failure> {
    let text = serde_json::to_string_pretty(report).map_err(Error::from)?;
    write_out(out, &(text + "\n"))?;
    Ok(if report.all_passed() { EXIT_OK } else { EXIT_CHECK_FAILED })
}

struct LoadedModel {
    rho: FaithfulDensity,
    direction: Direction,
    mean: f64,
    cfg: ModelConfig,
    inputs: Vec<u8>,
}

fn read_input(path: &Path) -> Result<(HermitianMatrix, Vec<u8>), Failure> {
    let bytes = std::fs::read(path)
        .map_err(|e| Failure::new(EXIT_MALFORMED, format!("cannot read {}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|_| Failure::new(EXIT_MALFORMED, format!("{} is not UTF-8", path.display())))?;
    let m = io::matrix_from_json(text).map_err(|e| Failure::new(EXIT_MALFORMED, format!("{}: {e}", path.display())))?;
    Ok((m, bytes))
}

fn model_config(lambda: f64, tol: f64) -> Result<ModelConfig, Failure> {
    let deformation = DeformationParameter::new(lambda)?;
    let scalar = ScalarEvalConfig {
        newton_tol: tol,
        ..ScalarEvalConfig::default()
    };
    scalar.validate()?;
    Ok(ModelConfig {
        deformation,
        scalar,
        ..ModelConfig::default()
    })
}

fn load_model(args: &ModelArgs) -> Result<LoadedModel, Failure> {
    let cfg = model_config(args.lambda, args.tol)?;
    let (rho_m, rho_bytes) = read_input(&args.rho)?;
    let (k, k_bytes) = read_input(&args.k)?;
    if rho_m.dim() != k.dim() {
        return Err(Error::DimensionMismatch(rho_m.dim(), k.dim()).into());
    }
    let rho = FaithfulDensity::new(rho_m)?;
    let mean = state::expectation(&rho, &k)?;
    let direction = if args.center {
        state::center_direction(&rho, &k)?
    } else {
        Direction::new(&rho, k)?
    };
    let params = serde_json::to_vec(&(args.lambda, args.tol, args.center)).map_err(Error::from)?;
    let mut inputs = Vec::new();
    for part in [&rho_bytes, &k_bytes, &params] {
        inputs.extend((part.len() as u64).to_le_bytes());
        inputs.extend(part.iter());
    }
    Ok(LoadedModel {
        rho,
        direction,
        mean,
        cfg,
        inputs,
    })
}

fn cmd_alpha(args: &AlphaArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let m = load_model(&args.model)?;
    let bounds = state::verify_alpha_bounds(&m.direction, &MAJORANT_BETAS, &m.cfg)?;
    let residual = state::normalization_value(&m.direction, bounds.alpha, &m.cfg)? - 1.0;
    let mut checks = vec![Check::le(
        "alpha.normalization_residual",
        "normalization",
        residual.abs(),
        0.0,
        state::NORMALIZATION_TOL,
    )];
    checks.extend(bounds.checks);
    let mut results = json!({
        "alpha": bounds.alpha,
        "s": bounds.s,
        "lambda": m.cfg.deformation.value(),
        "dim": m.rho.dim(),
        "normalization_residual": residual,
    });
    if args.model.center {
        results["mean"] = json!(m.mean);
        results["alpha_uncentered"] = json!(bounds.alpha + m.mean);
    }
    let report = RunReport {
        command: "alpha".into(),
        inputs: digest([b"alpha".as_slice(), &m.inputs]),
        results,
        checks,
    };
    write_report(out, &report)
}

fn cmd_geodesic(args: &GeodesicArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    if args.steps < 2 {
        return Err(Failure::new(EXIT_MALFORMED, "--steps must be at least 2"));
    }
    if !(args.t_min.is_finite() && args.t_max.is_finite() && args.t_min <= args.t_max) {
        return Err(Failure::new(EXIT_MALFORMED, "need finite --t-min <= --t-max"));
    }
    let m = load_model(&args.model)?;
    let probes = args
        .probes
        .iter()
        .map(|p| read_input(p).map(|(a, _)| a))
        .collect::<Result<Vec<_>, _>>()?;
    for a in &probes {
        if a.dim() != m.rho.dim() {
            return Err(Error::DimensionMismatch(m.rho.dim(), a.dim()).into());
        }
    }
    let step = (args.t_max - args.t_min) / (args.steps - 1) as f64;
    let grid: Vec<f64> = (0..args.steps)
        .map(|i| if i == args.steps - 1 { args.t_max } else { args.t_min + step * i as f64 })
        .collect();
    let curve = state::geodesic_sample(&m.rho, &m.direction, &grid, &probes, &m.cfg)?;
    write_out(out, &io::curve_csv(&curve))?;
    Ok(EXIT_OK)
}

fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let cfg = VerifyConfig {
        seed: args.seed,
        trials: args.trials,
        ..VerifyConfig::default()
    };
    let report = verify::run(args.suite.into(), &cfg)?;
    let code = write_report(out, &report)?;
    if code != EXIT_OK {
        let names: Vec<&str> = report.checks.iter().filter(|c| c.failed()).map(|c| c.name.as_str()).collect();
        eprintln!("{} check(s) failed: {}", names.len(), names.join(", "));
    }
    Ok(code)
}

fn cmd_counterexample(args: &CounterexampleArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let sc = ScalarEvalConfig::default();
    let cert = match &args.check {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::new(EXIT_MALFORMED, format!("cannot read {}: {e}", path.display())))?;
            io::certificate_from_json(&text)?
        }
        None => {
            let search = SearchConfig {
                seed: args.seed,
                ..SearchConfig::with_lambda(DeformationParameter::new(args.lambda)?)
            };
            lab::build_counterexample(args.function.into(), &search, &sc)?
        }
    };
    if args.check.is_some() && cert.function != LabFunction::from(args.function) {
        return Err(Failure::new(
            EXIT_MALFORMED,
            format!("certificate is for {}, not the requested function", cert.function),
        ));
    }
    let revalidation = cert.revalidate(&sc)?;
    let file = CertificateFile::new(&cert, Some(revalidation));
    let text = serde_json::to_string_pretty(&file).map_err(Error::from)?;
    write_out(out, &(text + "\n"))?;
    if revalidation.is_valid() {
        Ok(EXIT_OK)
    } else {
        eprintln!(
            "certificate does not re-validate: order gap {:e}, violation {:e}",
            revalidation.order_gap, revalidation.violation
        );
        Ok(EXIT_CHECK_FAILED)
    }
}

/// Parses `std::env::args`, runs the command and returns the exit code.
pub fn main() -> i32 {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match run(&cli, &mut lock) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
