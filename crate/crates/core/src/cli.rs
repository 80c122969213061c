//! Command-line front end.
//!
//! Exit status: 0 on success, 1 for usage or input errors, 2 for numerical
//! failures.

use std::ffi::OsString;
use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::ecf::LogFailure;
use crate::estimators::{self, ConfigOverrides, EstimateReport};
use crate::harness::{self, ExperimentPlan, HarnessError};
use crate::kernels::{verify_moments, KernelSet, MomentReport};
use crate::model::{check_class_membership, ClassParams, LevyTriplet, ModelDocument};
use crate::simulate;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "levy-spectral", version, about = "Spectral estimation of Lévy triplets from increments")]
struct Cli {
    /// JSON input: model document, plan, or estimation settings depending on the subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; results go to stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long = "grid-size", global = true)]
    grid_size: Option<usize>,
    #[arg(long, global = true)]
    eta: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate increments of the triplet in --config.
    Simulate {
        #[arg(long)]
        n: usize,
    },
    /// Estimate the triplet and Lévy density from a sample.
    Estimate {
        /// Increment file, one value per line. Without it the sample is simulated
        /// from the triplet in --config.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Run a Monte Carlo plan.
    Experiment,
    /// Build the spectral kernels and report their moment residuals.
    Kernels {
        #[arg(long)]
        beta: f64,
    },
    /// Check the triplet in --config against its class bounds.
    CheckClass,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::ExcessiveFlags { .. } | HarnessError::InconsistentAggregates { .. } => {
                CliError::Numerical(e.to_string())
            }
            other => CliError::Usage(other.to_string()),
        }
    }
}

/// Estimation settings: class bounds plus an optional triplet used for simulation.
#[derive(Debug, Deserialize)]
struct EstimateSettings {
    class: ClassParams,
    #[serde(flatten)]
    triplet: Option<LevyTriplet>,
}

#[derive(Debug, Serialize)]
struct KernelOutput {
    beta: f64,
    v: crate::kernels::SpectralKernel,
    u: crate::kernels::SpectralKernel,
    w: crate::kernels::SpectralKernel,
    moments: Vec<MomentReport>,
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn require_config(cli: &Cli) -> Result<&Path, CliError> {
    cli.config
        .as_deref()
        .ok_or_else(|| usage("--config is required for this subcommand"))
}

fn emit(cli: &Cli, file: &str, contents: &[u8], stdout: &mut dyn Write) -> Result<(), CliError> {
    match &cli.out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(usage)?;
            fs::write(dir.join(file), contents).map_err(usage)
        }
        None => stdout.write_all(contents).map_err(usage),
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(usage)?;
    text.push('\n');
    Ok(text.into_bytes())
}

fn overrides(cli: &Cli) -> ConfigOverrides {
    ConfigOverrides {
        eta: cli.eta,
        grid_size: cli.grid_size,
        x_grid: None,
    }
}

fn run_simulate(cli: &Cli, n: usize, stdout: &mut dyn Write) -> Result<(), CliError> {
    let doc: ModelDocument = read_json(require_config(cli)?)?;
    let sample = simulate::simulate_increments(&doc.triplet, n, cli.seed.unwrap_or(0)).map_err(usage)?;
    let mut buf = Vec::new();
    simulate::write_increments(&sample.values, &mut buf).map_err(usage)?;
    emit(cli, "increments.csv", &buf, stdout)
}

fn run_estimate(cli: &Cli, input: Option<&Path>, n: Option<usize>, stdout: &mut dyn Write) -> Result<(), CliError> {
    let settings: EstimateSettings = read_json(require_config(cli)?)?;
    let sample = match (input, n) {
        (Some(path), _) => {
            let file = fs::File::open(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            simulate::read_increments(BufReader::new(file)).map_err(|e| usage(format!("{}: {e}", path.display())))?
        }
        (None, Some(n)) => {
            let triplet = settings
                .triplet
                .ok_or_else(|| usage("simulating a sample needs a triplet in --config"))?;
            simulate::simulate_increments(&triplet, n, cli.seed.unwrap_or(0))
                .map_err(usage)?
                .values
        }
        (None, None) => return Err(usage("estimate needs --input FILE or --n N")),
    };
    let config = estimators::configure(sample.len(), &settings.class, &overrides(cli)).map_err(usage)?;
    let output = estimators::run_pipeline(&sample, &config).map_err(usage)?;
    let report = EstimateReport {
        estimate: output.estimate,
        config,
    };
    emit(cli, "estimate.json", &to_json(&report)?, stdout)?;
    if cli.out.is_some() {
        let mut buf = Vec::new();
        output.density.write_csv(&mut buf).map_err(usage)?;
        emit(cli, "density.csv", &buf, stdout)?;
    }
    match output.grid.log_failure {
        Some(LogFailure::UnresolvedWinding) => Err(CliError::Numerical(
            "distinguished logarithm could not be followed on the frequency grid".into(),
        )),
        Some(LogFailure::ZeroModulus) => {
            log::warn!("empirical characteristic function vanishes on the grid; drift set from a zero argument");
            Ok(())
        }
        None => Ok(()),
    }
}

fn run_experiment(cli: &Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    let mut plan: ExperimentPlan = read_json(require_config(cli)?)?;
    if let Some(seed) = cli.seed {
        plan.master_seed = seed;
    }
    if cli.eta.is_some() {
        plan.overrides.eta = cli.eta;
    }
    if cli.grid_size.is_some() {
        plan.overrides.grid_size = cli.grid_size;
    }
    let result = harness::run_experiment(&plan)?;
    match cli.out.clone().or_else(|| plan.output_dir.clone()) {
        Some(dir) => harness::write_results(&result, &dir)?,
        None => harness::write_aggregates(&result.aggregates, &mut *stdout).map_err(usage)?,
    }
    Ok(())
}

fn run_kernels(cli: &Cli, beta: f64, stdout: &mut dyn Write) -> Result<(), CliError> {
    let set = KernelSet::build(beta).map_err(usage)?;
    let moments: Vec<MomentReport> = [&set.v, &set.u, &set.w].into_iter().map(verify_moments).collect();
    let failed = moments.iter().any(|m| !m.passed);
    let output = KernelOutput {
        beta,
        v: set.v,
        u: set.u,
        w: set.w,
        moments,
    };
    emit(cli, "kernels.json", &to_json(&output)?, stdout)?;
    if failed {
        return Err(CliError::Numerical("kernel moment residuals exceed tolerance".into()));
    }
    Ok(())
}

fn run_check_class(cli: &Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    let doc: ModelDocument = read_json(require_config(cli)?)?;
    let class = doc
        .class
        .ok_or_else(|| usage("check-class needs a \"class\" object in --config"))?;
    class.validate().map_err(usage)?;
    let report = check_class_membership(&doc.triplet, &class);
    emit(cli, "class_report.json", &to_json(&report)?, stdout)
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match &cli.command {
        Command::Simulate { n } => run_simulate(&cli, *n, stdout),
        Command::Estimate { input, n } => run_estimate(&cli, input.as_deref(), *n, stdout),
        Command::Experiment => run_experiment(&cli, stdout),
        Command::Kernels { beta } => run_kernels(&cli, *beta, stdout),
        Command::CheckClass => run_check_class(&cli, stdout),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.code()
        }
    }
}
