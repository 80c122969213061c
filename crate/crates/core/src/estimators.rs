//! Spectral estimators of the Gaussian variance, jump intensity, drift and
//! Lévy density.
//!
//! All frequency integrals are composite Simpson sums over the ECF grid on
//! `[-1/h, 1/h]`. The sinc kernel's Fourier transform is the indicator of
//! `[-1, 1]`, so the smoothed ECF coincides with the raw ECF on the cutoff
//! window and no kernel density estimate of the observations is formed.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ecf::{self, clamp, EcfError, EcfGrid, DEFAULT_GRID_SIZE};
use crate::kernels::{dirichlet_term, KernelError, KernelSet, SpectralKernel};
use crate::model::{ClassParams, LevyTriplet};
use crate::quadrature::{simpson, simpson_weights};

/// Smallest sample size for which `log log n > 0` with margin.
pub const MIN_SAMPLE_SIZE: usize = 16;
/// Relative change tolerated between the full grid and its every-other-node subgrid.
pub const QUADRATURE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum EstimatorError {
    #[error("sample size {0} is below the minimum of {MIN_SAMPLE_SIZE}")]
    SampleTooSmall(usize),
    #[error("eta must lie in (0, Sigma^-2) = (0, {upper}), got {eta}")]
    InvalidEta { eta: f64, upper: f64 },
    #[error("bandwidth must be positive and finite, got {0}")]
    InvalidBandwidth(f64),
    #[error("grid cutoff {grid} does not match 1/h = {expected}")]
    CutoffMismatch { grid: f64, expected: f64 },
    #[error("x grid needs min < max and at least 2 points")]
    InvalidXGrid,
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Ecf(#[from] EcfError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XGrid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Default for XGrid {
    fn default() -> Self {
        Self {
            min: -10.0,
            max: 10.0,
            count: 1001,
        }
    }
}

impl XGrid {
    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.count - 1) as f64
    }

    pub fn points(&self) -> Vec<f64> {
        let step = self.step();
        (0..self.count).map(|k| self.min + step * k as f64).collect()
    }

    fn validate(&self) -> Result<(), EstimatorError> {
        if self.count >= 2 && self.min < self.max && self.min.is_finite() && self.max.is_finite() {
            Ok(())
        } else {
            Err(EstimatorError::InvalidXGrid)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub n: usize,
    pub eta: f64,
    pub h: f64,
    #[serde(rename = "m_n")]
    pub slow_growth: f64,
    /// Clamp level `M_n = m_n / h^2`.
    #[serde(rename = "M_n")]
    pub truncation: f64,
    pub beta: f64,
    pub grid_size: usize,
    pub x_grid: XGrid,
    pub kernels: KernelSet,
}

/// Optional replacements for the defaults of [`default_config`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ConfigOverrides {
    #[serde(default)]
    pub eta: Option<f64>,
    #[serde(default)]
    pub grid_size: Option<usize>,
    #[serde(default)]
    pub x_grid: Option<XGrid>,
}

/// `h = (eta log n)^{-1/2}` with `eta = Sigma^{-2} / 2`, `M_n = log(log n) / h^2`.
pub fn default_config(n: usize, params: &ClassParams) -> Result<EstimatorConfig, EstimatorError> {
    configure(n, params, &ConfigOverrides::default())
}

pub fn configure(n: usize, params: &ClassParams, overrides: &ConfigOverrides) -> Result<EstimatorConfig, EstimatorError> {
    if n < MIN_SAMPLE_SIZE {
        return Err(EstimatorError::SampleTooSmall(n));
    }
    let upper = params.sigma_bound.powi(-2);
    let eta = overrides.eta.unwrap_or(0.5 * upper);
    if !(eta > 0.0 && eta < upper) {
        return Err(EstimatorError::InvalidEta { eta, upper });
    }
    let log_n = (n as f64).ln();
    let h = (eta * log_n).powf(-0.5);
    let mut config = EstimatorConfig::with_bandwidth(n, h, log_n.ln(), params.beta)?;
    config.eta = eta;
    if let Some(size) = overrides.grid_size {
        ecf::symmetric_grid(1.0, size)?;
        config.grid_size = size;
    }
    if let Some(x_grid) = overrides.x_grid {
        x_grid.validate()?;
        config.x_grid = x_grid;
    }
    Ok(config)
}

impl EstimatorConfig {
    /// Configuration at an explicit bandwidth; `eta` is back-filled from `h`.
    pub fn with_bandwidth(n: usize, h: f64, slow_growth: f64, beta: f64) -> Result<Self, EstimatorError> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(EstimatorError::InvalidBandwidth(h));
        }
        let log_n = (n.max(2) as f64).ln();
        Ok(Self {
            n,
            eta: 1.0 / (h * h * log_n),
            h,
            slow_growth,
            truncation: slow_growth / (h * h),
            beta,
            grid_size: DEFAULT_GRID_SIZE,
            x_grid: XGrid::default(),
            kernels: KernelSet::build(beta)?,
        })
    }

    pub fn cutoff(&self) -> f64 {
        1.0 / self.h
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EstimateFlags {
    pub zero_risk: bool,
    pub truncation_active_sigma: bool,
    pub truncation_active_lambda: bool,
    pub truncation_active_gamma: bool,
    /// Some integral moved by more than [`QUADRATURE_TOLERANCE`] when the grid was halved.
    pub quadrature_unconverged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TripletEstimate {
    pub sigma2_hat: f64,
    pub lambda_hat: f64,
    pub gamma_hat: f64,
    pub flags: EstimateFlags,
}

/// One kernel-weighted frequency integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Component {
    pub value: f64,
    pub truncation_active: bool,
    pub converged: bool,
}

fn check_cutoff(grid: &EcfGrid, config: &EstimatorConfig) -> Result<(), EstimatorError> {
    let expected = config.cutoff();
    if (grid.cutoff - expected).abs() > 1e-12 * expected {
        return Err(EstimatorError::CutoffMismatch {
            grid: grid.cutoff,
            expected,
        });
    }
    Ok(())
}

/// Simpson integral of `clamp(series) * kernel^h` together with its
/// subgrid convergence check.
fn weighted_integral(grid: &EcfGrid, series: &[f64], kernel: &SpectralKernel, config: &EstimatorConfig) -> Component {
    let level = config.truncation;
    let integrand: Vec<f64> = grid
        .points
        .iter()
        .zip(series)
        .map(|(&t, &s)| clamp(s, level) * kernel.scaled(t, config.h))
        .collect();
    let step = grid.step();
    let value = simpson(&integrand, step);
    let converged = if (integrand.len() - 1) % 4 == 0 {
        let coarse: Vec<f64> = integrand.iter().step_by(2).copied().collect();
        let coarse_value = simpson(&coarse, 2.0 * step);
        (value - coarse_value).abs() <= QUADRATURE_TOLERANCE * value.abs().max(1.0)
    } else {
        true
    };
    Component {
        value,
        truncation_active: series.iter().any(|s| s.abs() > level),
        converged,
    }
}

/// `int clamp(log|phi_emp|, M_n) v^h(t) dt`.
pub fn estimate_sigma2(grid: &EcfGrid, config: &EstimatorConfig) -> Result<Component, EstimatorError> {
    check_cutoff(grid, config)?;
    Ok(weighted_integral(grid, &grid.log_modulus, &config.kernels.v, config))
}

/// `int clamp(log|phi_emp|, M_n) u^h(t) dt`.
pub fn estimate_lambda(grid: &EcfGrid, config: &EstimatorConfig) -> Result<Component, EstimatorError> {
    check_cutoff(grid, config)?;
    Ok(weighted_integral(grid, &grid.log_modulus, &config.kernels.u, config))
}

/// `int clamp(arg phi_emp, M_n) w^h(t) dt` with the distinguished argument
/// (identically zero when it could not be followed).
pub fn estimate_gamma(grid: &EcfGrid, config: &EstimatorConfig) -> Result<Component, EstimatorError> {
    check_cutoff(grid, config)?;
    Ok(weighted_integral(grid, &grid.unwrapped_arg, &config.kernels.w, config))
}

pub fn estimate_triplet(grid: &EcfGrid, config: &EstimatorConfig) -> Result<TripletEstimate, EstimatorError> {
    let sigma2 = estimate_sigma2(grid, config)?;
    let lambda = estimate_lambda(grid, config)?;
    let gamma = estimate_gamma(grid, config)?;
    Ok(TripletEstimate {
        sigma2_hat: sigma2.value,
        lambda_hat: lambda.value,
        gamma_hat: gamma.value,
        flags: EstimateFlags {
            zero_risk: grid.zero_risk_flag,
            truncation_active_sigma: sigma2.truncation_active,
            truncation_active_lambda: lambda.truncation_active,
            truncation_active_gamma: gamma.truncation_active,
            quadrature_unconverged: !(sigma2.converged && lambda.converged && gamma.converged),
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub x: Vec<f64>,
    pub rho_hat: Vec<f64>,
    /// Largest imaginary part discarded when taking the real part.
    pub imag_residual: f64,
    pub config: EstimatorConfig,
}

impl DensityEstimate {
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(["x", "rho_hat"])?;
        for (x, r) in self.x.iter().zip(&self.rho_hat) {
            writer.write_record(&[x.to_string(), r.to_string()])?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// Fourier transform of the density estimate on the grid nodes:
/// `-i gamma t + lambda + sigma^2 t^2 / 2 + clamp(log|phi|) + i clamp(arg phi)`.
pub fn rho_spectrum(grid: &EcfGrid, estimate: &TripletEstimate, config: &EstimatorConfig) -> Vec<Complex64> {
    let level = config.truncation;
    grid.points
        .iter()
        .zip(grid.log_modulus.iter().zip(&grid.unwrapped_arg))
        .map(|(&t, (&l, &a))| {
            Complex64::new(
                estimate.lambda_hat + 0.5 * estimate.sigma2_hat * t * t + clamp(l, level),
                -estimate.gamma_hat * t + clamp(a, level),
            )
        })
        .collect()
}

/// Truncated Fourier inversion of the estimated Lévy exponent on `config.x_grid`.
///
/// The drift, intensity and variance terms use the closed-form Dirichlet
/// integrals; the clamped log-modulus and argument are integrated on the grid.
pub fn estimate_rho(
    grid: &EcfGrid,
    estimate: &TripletEstimate,
    config: &EstimatorConfig,
) -> Result<DensityEstimate, EstimatorError> {
    check_cutoff(grid, config)?;
    config.x_grid.validate()?;
    let level = config.truncation;
    let weights = simpson_weights(grid.len(), grid.step());
    // Weighted (clamped log + i clamped arg) / 2pi at each node.
    let nodes: Vec<(f64, Complex64)> = grid
        .points
        .iter()
        .zip(&weights)
        .zip(grid.log_modulus.iter().zip(&grid.unwrapped_arg))
        .map(|((&t, &w), (&l, &a))| (t, Complex64::new(clamp(l, level), clamp(a, level)) * (w / (2.0 * PI))))
        .collect();
    let cutoff = config.cutoff();
    let xs = config.x_grid.points();
    let values: Vec<Complex64> = xs
        .par_iter()
        .map(|&x| {
            let closed = Complex64::new(0.0, -estimate.gamma_hat) * dirichlet_term(1, x, cutoff)
                + estimate.lambda_hat * dirichlet_term(0, x, cutoff)
                + 0.5 * estimate.sigma2_hat * dirichlet_term(2, x, cutoff);
            let numeric: Complex64 = nodes
                .iter()
                .map(|&(t, c)| {
                    let (s, co) = (t * x).sin_cos();
                    Complex64::new(co, -s) * c
                })
                .sum();
            closed + numeric
        })
        .collect();
    let imag_residual = values.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    Ok(DensityEstimate {
        x: xs,
        rho_hat: values.iter().map(|v| v.re).collect(),
        imag_residual,
        config: config.clone(),
    })
}

/// Grid carrying the exact characteristic function of `triplet`, with the
/// exact log-modulus and distinguished argument in place of unwrapped values.
pub fn oracle_grid(triplet: &LevyTriplet, config: &EstimatorConfig) -> Result<EcfGrid, EstimatorError> {
    let points = ecf::symmetric_grid(config.cutoff(), config.grid_size)?;
    let values = points.iter().map(|&t| triplet.char_fn(t)).collect();
    let log_modulus = points.iter().map(|&t| triplet.log_modulus(t)).collect();
    let unwrapped_arg = points.iter().map(|&t| triplet.distinguished_arg(t)).collect();
    Ok(EcfGrid {
        cutoff: config.cutoff(),
        points,
        values,
        log_modulus,
        unwrapped_arg,
        zero_risk_flag: false,
        log_failure: None,
    })
}

/// Output of the full pipeline on one sample.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub grid: EcfGrid,
    pub estimate: TripletEstimate,
    pub density: DensityEstimate,
}

/// ECF, distinguished logarithm, triplet estimate and density estimate.
pub fn run_pipeline(sample: &[f64], config: &EstimatorConfig) -> Result<PipelineOutput, EstimatorError> {
    let grid = ecf::compute_ecf(sample, config.cutoff(), config.grid_size)?;
    let estimate = estimate_triplet(&grid, config)?;
    let density = estimate_rho(&grid, &estimate, config)?;
    Ok(PipelineOutput {
        grid,
        estimate,
        density,
    })
}

/// JSON shape of an `estimate` result.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimateReport {
    #[serde(flatten)]
    pub estimate: TripletEstimate,
    pub config: EstimatorConfig,
}
