//! Empirical characteristic function on a symmetric frequency grid, its
//! distinguished logarithm, and the zero-modulus diagnostic.

use std::f64::consts::FRAC_PI_2;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::ClassParams;

/// Default number of frequency nodes.
pub const DEFAULT_GRID_SIZE: usize = 2049;
/// Moduli below this are treated as zeros of the ECF.
pub const ZERO_MODULUS: f64 = 1e-300;
/// Largest accepted phase increment between neighbouring nodes.
pub const MAX_PHASE_STEP: f64 = FRAC_PI_2;
/// Number of interval halvings tried before a winding is declared unresolved.
pub const MAX_REFINEMENTS: u32 = 4;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum EcfError {
    #[error("sample is empty")]
    EmptySample,
    #[error("grid size must be odd and at least 3, got {0}")]
    InvalidGridSize(usize),
    #[error("cutoff must be positive and finite, got {0}")]
    InvalidCutoff(f64),
}

/// Why the distinguished logarithm could not be followed along the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
pub enum LogFailure {
    #[error("characteristic function vanishes on the grid")]
    ZeroModulus,
    #[error("phase winding unresolved after {MAX_REFINEMENTS} refinements")]
    UnresolvedWinding,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EcfGrid {
    pub cutoff: f64,
    /// `t_k = cutoff (k - m) / m`, `k = 0..=2m`.
    pub points: Vec<f64>,
    pub values: Vec<Complex64>,
    pub log_modulus: Vec<f64>,
    pub unwrapped_arg: Vec<f64>,
    pub zero_risk_flag: bool,
    pub log_failure: Option<LogFailure>,
}

impl EcfGrid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn center(&self) -> usize {
        self.points.len() / 2
    }

    pub fn step(&self) -> f64 {
        self.cutoff / self.center() as f64
    }

    /// Writes `t,re,im,log_modulus,unwrapped_arg` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(["t", "re", "im", "log_modulus", "unwrapped_arg"])?;
        for k in 0..self.len() {
            writer.write_record(&[
                self.points[k].to_string(),
                self.values[k].re.to_string(),
                self.values[k].im.to_string(),
                self.log_modulus[k].to_string(),
                self.unwrapped_arg[k].to_string(),
            ])?;
        }
        writer.flush()?;
        Ok(())
    }
}

pub fn symmetric_grid(cutoff: f64, grid_size: usize) -> Result<Vec<f64>, EcfError> {
    if grid_size < 3 || grid_size % 2 == 0 {
        return Err(EcfError::InvalidGridSize(grid_size));
    }
    if !(cutoff > 0.0 && cutoff.is_finite()) {
        return Err(EcfError::InvalidCutoff(cutoff));
    }
    let m = (grid_size / 2) as f64;
    Ok((0..grid_size)
        .map(|k| cutoff * (k as f64 - m) / m)
        .collect())
}

/// `n^{-1} sum_j exp(i t X_j)`.
pub fn ecf_at(sample: &[f64], t: f64) -> Complex64 {
    let (mut re, mut im) = (0.0, 0.0);
    for &x in sample {
        let (s, c) = (t * x).sin_cos();
        re += c;
        im += s;
    }
    let n = sample.len() as f64;
    Complex64::new(re / n, im / n)
}

/// ECF of `sample` on `grid_size` nodes over `[-cutoff, cutoff]`, with the
/// distinguished logarithm filled in.
///
/// Only the non-negative half is evaluated; the negative half is its conjugate
/// mirror, so Hermitian symmetry holds exactly.
pub fn compute_ecf(sample: &[f64], cutoff: f64, grid_size: usize) -> Result<EcfGrid, EcfError> {
    if sample.is_empty() {
        return Err(EcfError::EmptySample);
    }
    let points = symmetric_grid(cutoff, grid_size)?;
    let m = grid_size / 2;
    let half: Vec<Complex64> = points[m..]
        .par_iter()
        .enumerate()
        .map(|(j, &t)| if j == 0 { Complex64::new(1.0, 0.0) } else { ecf_at(sample, t) })
        .collect();
    let mut values = vec![Complex64::new(0.0, 0.0); grid_size];
    for (j, v) in half.iter().enumerate() {
        values[m + j] = *v;
        values[m - j] = v.conj();
    }
    let mut grid = unfilled(cutoff, points, values);
    // The refinement source is only called where a phase step is too large.
    let _ = dist_log(&mut grid, |t| ecf_at(sample, t));
    Ok(grid)
}

/// Grid of an arbitrary function (e.g. an exact characteristic function).
/// `source(0)` is expected to be 1.
pub fn grid_from_fn<F>(cutoff: f64, grid_size: usize, source: F) -> Result<EcfGrid, EcfError>
where
    F: Fn(f64) -> Complex64 + Sync,
{
    let points = symmetric_grid(cutoff, grid_size)?;
    let values: Vec<Complex64> = points.par_iter().map(|&t| source(t)).collect();
    let mut grid = unfilled(cutoff, points, values);
    let _ = dist_log(&mut grid, source);
    Ok(grid)
}

fn unfilled(cutoff: f64, points: Vec<f64>, values: Vec<Complex64>) -> EcfGrid {
    let n = points.len();
    EcfGrid {
        cutoff,
        points,
        values,
        log_modulus: vec![0.0; n],
        unwrapped_arg: vec![0.0; n],
        zero_risk_flag: false,
        log_failure: None,
    }
}

/// Fills `log_modulus` and `unwrapped_arg` by following the argument
/// outward from `t = 0`.
///
/// A step whose phase increment exceeds pi/2 is re-walked on a finer
/// subdivision of that interval, evaluating `source` at the new nodes; the
/// subdivision is doubled up to [`MAX_REFINEMENTS`] times.
///
/// On failure the argument is set to zero everywhere and the grid is flagged;
/// the log-modulus is still filled (with vanishing moduli floored at the
/// smallest positive double).
pub fn dist_log<F: Fn(f64) -> Complex64>(grid: &mut EcfGrid, source: F) -> Result<(), LogFailure> {
    let n = grid.len();
    let m = grid.center();
    for k in 0..n {
        grid.log_modulus[k] = grid.values[k].norm().max(f64::MIN_POSITIVE).ln();
    }
    grid.unwrapped_arg.iter_mut().for_each(|a| *a = 0.0);

    let result = if grid.values.iter().any(|v| v.norm() < ZERO_MODULUS) {
        Err(LogFailure::ZeroModulus)
    } else {
        unwrap_from_center(grid, m, &source)
    };
    if let Err(failure) = result {
        grid.unwrapped_arg.iter_mut().for_each(|a| *a = 0.0);
        grid.zero_risk_flag = true;
        grid.log_failure = Some(failure);
    } else {
        grid.log_failure = None;
    }
    result
}

fn unwrap_from_center<F: Fn(f64) -> Complex64>(grid: &mut EcfGrid, m: usize, source: &F) -> Result<(), LogFailure> {
    grid.unwrapped_arg[m] = 0.0;
    for k in m + 1..grid.len() {
        let step = phase_step(grid.points[k - 1], grid.values[k - 1], grid.points[k], grid.values[k], source)?;
        grid.unwrapped_arg[k] = grid.unwrapped_arg[k - 1] + step;
    }
    for k in (0..m).rev() {
        let step = phase_step(grid.points[k + 1], grid.values[k + 1], grid.points[k], grid.values[k], source)?;
        grid.unwrapped_arg[k] = grid.unwrapped_arg[k + 1] + step;
    }
    Ok(())
}

/// Principal argument of `to / from`.
fn principal_step(from: Complex64, to: Complex64) -> f64 {
    (to * from.conj()).arg()
}

fn phase_step<F: Fn(f64) -> Complex64>(
    t0: f64,
    v0: Complex64,
    t1: f64,
    v1: Complex64,
    source: &F,
) -> Result<f64, LogFailure> {
    let direct = principal_step(v0, v1);
    if direct.abs() <= MAX_PHASE_STEP {
        return Ok(direct);
    }
    'refine: for level in 1..=MAX_REFINEMENTS {
        let pieces = 1usize << level;
        let mut total = 0.0;
        let mut prev = v0;
        for i in 1..=pieces {
            let next = if i == pieces {
                v1
            } else {
                source(t0 + (t1 - t0) * i as f64 / pieces as f64)
            };
            if next.norm() < ZERO_MODULUS {
                return Err(LogFailure::ZeroModulus);
            }
            let step = principal_step(prev, next);
            if step.abs() > MAX_PHASE_STEP {
                continue 'refine;
            }
            total += step;
            prev = next;
        }
        return Ok(total);
    }
    Err(LogFailure::UnresolvedWinding)
}

/// `max(min(log|phi|, M), -M)` per node.
pub fn truncate_log_modulus(grid: &EcfGrid, truncation: f64) -> Vec<f64> {
    grid.log_modulus.iter().map(|&l| clamp(l, truncation)).collect()
}

pub(crate) fn clamp(value: f64, level: f64) -> f64 {
    value.min(level).max(-level)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroRiskReport {
    pub flagged: bool,
    /// `min_k |phi_emp(t_k)| - delta`.
    pub margin: f64,
    pub delta: f64,
}

/// `delta = exp(-2 Lambda - Sigma^2 / (2 h^2)) / 2`.
pub fn zero_risk_delta(params: &ClassParams, h: f64) -> f64 {
    let sigma = params.sigma_bound;
    0.5 * (-2.0 * params.intensity_bound - sigma * sigma / (2.0 * h * h)).exp()
}

/// Outside the exceptional set `|phi_emp| >= delta` on the whole cutoff
/// window; a smaller modulus on the grid flags the run.
pub fn zero_risk_diagnostic(grid: &EcfGrid, params: &ClassParams, h: f64) -> ZeroRiskReport {
    let delta = zero_risk_delta(params, h);
    let min_modulus = grid.values.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
    ZeroRiskReport {
        flagged: min_modulus < delta,
        margin: min_modulus - delta,
        delta,
    }
}
