//! Monte Carlo experiment driver: replicate sweeps over sample sizes, squared
//! error aggregation for the triplet and integrated squared error for the
//! Lévy density.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ecf::{self, LogFailure};
use crate::estimators::{self, ConfigOverrides, DensityEstimate, EstimatorError};
use crate::model::{check_class_membership, ClassParams, ClassReport, LevyTriplet, ModelError};
use crate::quadrature::trapezoid;
use crate::simulate::{self, SimulationError};

/// Largest tolerated share of flagged replicates at any sample size.
pub const MAX_FLAG_RATE: f64 = 0.5;
/// Lévy density level at the x-grid ends above which truncation bias is reported.
pub const SUPPORT_WARNING_LEVEL: f64 = 1e-6;

pub const AGGREGATE_HEADER: [&str; 6] = ["n", "mse_sigma2", "mse_lambda", "mse_gamma", "mean_mise", "flag_rate"];
pub const MEDIAN_HEADER: [&str; 5] = ["n", "median_se_sigma2", "median_se_lambda", "median_se_gamma", "median_mise"];
pub const RECORD_HEADER: [&str; 10] = [
    "n",
    "replicate",
    "sigma2_hat",
    "lambda_hat",
    "gamma_hat",
    "mise_rho",
    "zero_risk",
    "failed",
    "truncation_active",
    "quadrature_unconverged",
];

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error("triplet is outside the declared class: {0:?}")]
    ClassMembership(Box<ClassReport>),
    #[error("flag rate {rate} at n = {n} exceeds {MAX_FLAG_RATE}")]
    ExcessiveFlags { n: usize, rate: f64 },
    #[error("stored aggregates at n = {n} disagree with records ({field})")]
    InconsistentAggregates { n: usize, field: &'static str },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
    #[error(transparent)]
    Simulation(#[from] SimulationError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub triplet: LevyTriplet,
    pub class: ClassParams,
    pub n_values: Vec<usize>,
    pub replicates: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub overrides: ConfigOverrides,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Run even if the triplet fails the class conditions.
    #[serde(default)]
    pub skip_class_check: bool,
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<(), HarnessError> {
        self.triplet.validate()?;
        self.class.validate()?;
        if self.replicates == 0 {
            return Err(HarnessError::InvalidPlan("replicates must be at least 1".into()));
        }
        if self.n_values.is_empty() {
            return Err(HarnessError::InvalidPlan("n_values is empty".into()));
        }
        if self.n_values.iter().any(|&n| n < estimators::MIN_SAMPLE_SIZE) {
            return Err(HarnessError::InvalidPlan(format!(
                "every n must be at least {}",
                estimators::MIN_SAMPLE_SIZE
            )));
        }
        if self.n_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(HarnessError::InvalidPlan("n_values must be strictly increasing".into()));
        }
        Ok(())
    }
}

/// Generator stream of replicate `replicate` at sample-size index `n_index`.
pub fn replicate_stream(n_index: usize, replicate: usize) -> u64 {
    ((n_index as u64) << 32) | replicate as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub n: usize,
    pub replicate: usize,
    pub sigma2_hat: f64,
    pub lambda_hat: f64,
    pub gamma_hat: f64,
    pub mise_rho: f64,
    pub zero_risk: bool,
    /// The distinguished logarithm could not be followed; excluded from aggregates.
    pub failed: bool,
    pub truncation_active: bool,
    pub quadrature_unconverged: bool,
}

impl ReplicateRecord {
    pub fn flagged(&self) -> bool {
        self.failed || self.zero_risk
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub n: usize,
    pub mse_sigma2: f64,
    pub mse_lambda: f64,
    pub mse_gamma: f64,
    pub mean_mise: f64,
    pub flag_rate: f64,
    pub median_se_sigma2: f64,
    pub median_se_lambda: f64,
    pub median_se_gamma: f64,
    pub median_mise: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub truth: LevyTriplet,
    pub records: Vec<ReplicateRecord>,
    pub aggregates: Vec<Aggregate>,
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        0.5 * (sorted[mid - 1] + sorted[mid])
    }
}

/// Per-n aggregates over non-failed records; `records` must be sorted by `(n, replicate)`.
pub fn aggregate(records: &[ReplicateRecord], truth: &LevyTriplet) -> Vec<Aggregate> {
    let mut out = Vec::new();
    let mut start = 0;
    while start < records.len() {
        let n = records[start].n;
        let end = start + records[start..].iter().take_while(|r| r.n == n).count();
        let group = &records[start..end];
        let used: Vec<&ReplicateRecord> = group.iter().filter(|r| !r.failed).collect();
        let se = |f: &dyn Fn(&ReplicateRecord) -> f64| used.iter().map(|r| f(r)).collect::<Vec<f64>>();
        let se_sigma2 = se(&|r| (r.sigma2_hat - truth.sigma2).powi(2));
        let se_lambda = se(&|r| (r.lambda_hat - truth.lambda).powi(2));
        let se_gamma = se(&|r| (r.gamma_hat - truth.gamma).powi(2));
        let mises = se(&|r| r.mise_rho);
        out.push(Aggregate {
            n,
            mse_sigma2: mean(&se_sigma2),
            mse_lambda: mean(&se_lambda),
            mse_gamma: mean(&se_gamma),
            mean_mise: mean(&mises),
            flag_rate: group.iter().filter(|r| r.flagged()).count() as f64 / group.len() as f64,
            median_se_sigma2: median(&se_sigma2),
            median_se_lambda: median(&se_lambda),
            median_se_gamma: median(&se_gamma),
            median_mise: median(&mises),
        });
        start = end;
    }
    out
}

/// Integrated squared error of `density` against the true Lévy density,
/// trapezoidal on the estimate's x grid.
pub fn mise(density: &DensityEstimate, triplet: &LevyTriplet) -> f64 {
    if support_truncated(density, triplet) {
        log::warn!(
            "Lévy density exceeds {SUPPORT_WARNING_LEVEL} at the x-grid ends; integrated error is truncated"
        );
    }
    let sq: Vec<f64> = density
        .x
        .iter()
        .zip(&density.rho_hat)
        .map(|(&x, &r)| (r - triplet.levy_density(x)).powi(2))
        .collect();
    let step = if density.x.len() > 1 {
        density.x[1] - density.x[0]
    } else {
        0.0
    };
    trapezoid(&sq, step)
}

pub fn support_truncated(density: &DensityEstimate, triplet: &LevyTriplet) -> bool {
    match (density.x.first(), density.x.last()) {
        (Some(&lo), Some(&hi)) => {
            triplet.levy_density(lo).abs() > SUPPORT_WARNING_LEVEL || triplet.levy_density(hi).abs() > SUPPORT_WARNING_LEVEL
        }
        _ => false,
    }
}

fn run_replicate(plan: &ExperimentPlan, n_index: usize, replicate: usize) -> Result<ReplicateRecord, HarnessError> {
    let n = plan.n_values[n_index];
    let sample = simulate::simulate_stream(&plan.triplet, n, plan.master_seed, replicate_stream(n_index, replicate))?;
    let config = estimators::configure(n, &plan.class, &plan.overrides)?;
    let grid = ecf::compute_ecf(&sample.values, config.cutoff(), config.grid_size).map_err(EstimatorError::from)?;
    let diagnostic = ecf::zero_risk_diagnostic(&grid, &plan.class, config.h);
    let estimate = estimators::estimate_triplet(&grid, &config)?;
    let density = estimators::estimate_rho(&grid, &estimate, &config)?;
    let flags = estimate.flags;
    Ok(ReplicateRecord {
        n,
        replicate,
        sigma2_hat: estimate.sigma2_hat,
        lambda_hat: estimate.lambda_hat,
        gamma_hat: estimate.gamma_hat,
        mise_rho: mise(&density, &plan.triplet),
        zero_risk: flags.zero_risk || diagnostic.flagged,
        failed: grid.log_failure == Some(LogFailure::UnresolvedWinding),
        truncation_active: flags.truncation_active_sigma || flags.truncation_active_lambda || flags.truncation_active_gamma,
        quadrature_unconverged: flags.quadrature_unconverged,
    })
}

pub fn run_experiment(plan: &ExperimentPlan) -> Result<ExperimentResult, HarnessError> {
    plan.validate()?;
    if !plan.skip_class_check {
        let report = check_class_membership(&plan.triplet, &plan.class);
        if !report.all_passed() {
            return Err(HarnessError::ClassMembership(Box::new(report)));
        }
    }
    let mut records = Vec::with_capacity(plan.n_values.len() * plan.replicates);
    for n_index in 0..plan.n_values.len() {
        let batch: Result<Vec<ReplicateRecord>, HarnessError> = (0..plan.replicates)
            .into_par_iter()
            .map(|r| run_replicate(plan, n_index, r))
            .collect();
        records.extend(batch?);
    }
    records.sort_by_key(|r| (r.n, r.replicate));
    let aggregates = aggregate(&records, &plan.triplet);
    if let Some(bad) = aggregates.iter().find(|a| a.flag_rate > MAX_FLAG_RATE) {
        return Err(HarnessError::ExcessiveFlags {
            n: bad.n,
            rate: bad.flag_rate,
        });
    }
    Ok(ExperimentResult {
        truth: plan.triplet,
        records,
        aggregates,
    })
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

pub fn write_aggregates<W: Write>(aggregates: &[Aggregate], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(AGGREGATE_HEADER)?;
    for a in aggregates {
        w.write_record(&[
            a.n.to_string(),
            a.mse_sigma2.to_string(),
            a.mse_lambda.to_string(),
            a.mse_gamma.to_string(),
            a.mean_mise.to_string(),
            a.flag_rate.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_medians<W: Write>(aggregates: &[Aggregate], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(MEDIAN_HEADER)?;
    for a in aggregates {
        w.write_record(&[
            a.n.to_string(),
            a.median_se_sigma2.to_string(),
            a.median_se_lambda.to_string(),
            a.median_se_gamma.to_string(),
            a.median_mise.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_records<W: Write>(records: &[ReplicateRecord], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RECORD_HEADER)?;
    for r in records {
        w.write_record(&[
            r.n.to_string(),
            r.replicate.to_string(),
            r.sigma2_hat.to_string(),
            r.lambda_hat.to_string(),
            r.gamma_hat.to_string(),
            r.mise_rho.to_string(),
            flag(r.zero_risk).to_string(),
            flag(r.failed).to_string(),
            flag(r.truncation_active).to_string(),
            flag(r.quadrature_unconverged).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub const RECORDS_FILE: &str = "records.csv";
pub const AGGREGATES_FILE: &str = "aggregates.csv";
pub const MEDIANS_FILE: &str = "medians.csv";
pub const TRUTH_FILE: &str = "truth.json";

/// Writes records, aggregates, medians and the true triplet into `dir`.
pub fn write_results(result: &ExperimentResult, dir: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(dir)?;
    write_records(&result.records, fs::File::create(dir.join(RECORDS_FILE))?)?;
    write_aggregates(&result.aggregates, fs::File::create(dir.join(AGGREGATES_FILE))?)?;
    write_medians(&result.aggregates, fs::File::create(dir.join(MEDIANS_FILE))?)?;
    fs::write(dir.join(TRUTH_FILE), serde_json::to_string_pretty(&result.truth)?)?;
    Ok(())
}

fn format_error(path: &Path, message: impl Into<String>) -> HarnessError {
    HarnessError::Format {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn parse_field<T: std::str::FromStr>(path: &Path, line: u64, record: &csv::StringRecord, index: usize) -> Result<T, HarnessError> {
    let raw = record
        .get(index)
        .ok_or_else(|| format_error(path, format!("line {line}: missing column {}", index + 1)))?;
    raw.parse()
        .map_err(|_| format_error(path, format!("line {line}: cannot parse {raw:?} in column {}", index + 1)))
}

fn parse_flag(path: &Path, line: u64, record: &csv::StringRecord, index: usize) -> Result<bool, HarnessError> {
    Ok(parse_field::<u8>(path, line, record, index)? != 0)
}

fn check_header(path: &Path, reader: &mut csv::Reader<fs::File>, expected: &[&str]) -> Result<(), HarnessError> {
    let header = reader.headers()?;
    if header.iter().ne(expected.iter().copied()) {
        return Err(format_error(path, format!("line 1: expected header {}", expected.join(","))));
    }
    Ok(())
}

fn close(a: f64, b: f64) -> bool {
    (a.is_nan() && b.is_nan()) || (a - b).abs() <= 1e-14 * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Reads a result directory and checks the stored aggregates against the records.
pub fn load_results(dir: &Path) -> Result<ExperimentResult, HarnessError> {
    let truth: LevyTriplet = serde_json::from_str(&fs::read_to_string(dir.join(TRUTH_FILE))?)?;

    let path = dir.join(RECORDS_FILE);
    let mut reader = csv::Reader::from_path(&path)?;
    check_header(&path, &mut reader, &RECORD_HEADER)?;
    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let line = i as u64 + 2;
        records.push(ReplicateRecord {
            n: parse_field(&path, line, &row, 0)?,
            replicate: parse_field(&path, line, &row, 1)?,
            sigma2_hat: parse_field(&path, line, &row, 2)?,
            lambda_hat: parse_field(&path, line, &row, 3)?,
            gamma_hat: parse_field(&path, line, &row, 4)?,
            mise_rho: parse_field(&path, line, &row, 5)?,
            zero_risk: parse_flag(&path, line, &row, 6)?,
            failed: parse_flag(&path, line, &row, 7)?,
            truncation_active: parse_flag(&path, line, &row, 8)?,
            quadrature_unconverged: parse_flag(&path, line, &row, 9)?,
        });
    }
    records.sort_by_key(|r| (r.n, r.replicate));
    let aggregates = aggregate(&records, &truth);

    let path = dir.join(AGGREGATES_FILE);
    let mut reader = csv::Reader::from_path(&path)?;
    check_header(&path, &mut reader, &AGGREGATE_HEADER)?;
    let mut stored = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let line = i as u64 + 2;
        let values: Vec<f64> = (1..6)
            .map(|k| parse_field(&path, line, &row, k))
            .collect::<Result<_, _>>()?;
        stored.push((parse_field::<usize>(&path, line, &row, 0)?, values));
    }
    if stored.len() != aggregates.len() {
        return Err(format_error(&path, "number of rows does not match the records"));
    }
    for ((n, values), a) in stored.iter().zip(&aggregates) {
        let fields = [
            ("mse_sigma2", a.mse_sigma2),
            ("mse_lambda", a.mse_lambda),
            ("mse_gamma", a.mse_gamma),
            ("mean_mise", a.mean_mise),
            ("flag_rate", a.flag_rate),
        ];
        if *n != a.n {
            return Err(HarnessError::InconsistentAggregates { n: *n, field: "n" });
        }
        for ((field, recomputed), stored_value) in fields.iter().zip(values) {
            if !close(*recomputed, *stored_value) {
                return Err(HarnessError::InconsistentAggregates { n: a.n, field });
            }
        }
    }
    Ok(ExperimentResult {
        truth,
        records,
        aggregates,
    })
}
