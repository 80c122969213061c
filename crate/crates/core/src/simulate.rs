//! Seeded simulation of unit-spaced Lévy increments
//! `X_j = gamma + sigma Z_j + sum_{i <= N_j} W_{j,i}`.
//!
//! Generator: ChaCha20 (`rand_chacha`), keyed by `seed_from_u64(seed)` and
//! positioned on stream `stream`. Within a stream draws are taken in a fixed
//! order per increment: the Poisson count, then the count's jump sizes, then
//! the Gaussian (two uniforms, Box-Muller).

use std::f64::consts::PI;
use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::model::{JumpDensity, LevyTriplet, ModelError};

#[derive(Debug, thiserror::Error)]
pub enum SimulationError {
    #[error("number of increments must be at least 1")]
    EmptyRequest,
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, thiserror::Error)]
pub enum SampleIoError {
    #[error("line {line}: cannot parse {content:?} as a number")]
    Parse { line: usize, content: String },
    #[error("sample file contains no increments")]
    Empty,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncrementSample {
    pub values: Vec<f64>,
    pub seed: u64,
    pub stream: u64,
    pub triplet: LevyTriplet,
    /// Number of jumps that went into each increment.
    pub jump_counts: Vec<u64>,
}

pub fn generator(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Open-interval uniform on `(0, 1)`.
fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// Standard normal via Box-Muller; the sine branch is discarded.
pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1 = open_unit(rng);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

fn laplace_quantile(p: f64) -> f64 {
    if p < 0.5 {
        (2.0 * p).ln()
    } else {
        -(2.0 * (1.0 - p)).ln()
    }
}

/// One jump size drawn from `density`.
pub fn sample_jump<R: Rng + ?Sized>(density: &JumpDensity, rng: &mut R) -> f64 {
    match *density {
        JumpDensity::Gaussian { mean, sd } => mean + sd * standard_normal(rng),
        JumpDensity::Laplace { location, scale } => location + scale * laplace_quantile(open_unit(rng)),
        JumpDensity::BilateralExponential { rate } => laplace_quantile(open_unit(rng)) / rate,
        JumpDensity::UniformSym { halfwidth } => halfwidth * (2.0 * rng.random::<f64>() - 1.0),
    }
}

pub fn simulate_increments(triplet: &LevyTriplet, n: usize, seed: u64) -> Result<IncrementSample, SimulationError> {
    simulate_stream(triplet, n, seed, 0)
}

pub fn simulate_stream(
    triplet: &LevyTriplet,
    n: usize,
    seed: u64,
    stream: u64,
) -> Result<IncrementSample, SimulationError> {
    if n == 0 {
        return Err(SimulationError::EmptyRequest);
    }
    triplet.validate()?;
    let mut rng = generator(seed, stream);
    let poisson = (triplet.lambda > 0.0).then(|| Poisson::new(triplet.lambda).expect("positive finite rate"));
    let sigma = triplet.sigma();
    let mut values = Vec::with_capacity(n);
    let mut jump_counts = Vec::with_capacity(n);
    for _ in 0..n {
        let count = match &poisson {
            Some(p) => p.sample(&mut rng) as u64,
            None => 0,
        };
        let mut jumps = 0.0;
        for _ in 0..count {
            jumps += sample_jump(&triplet.jump_density, &mut rng);
        }
        let diffusion = if sigma > 0.0 { sigma * standard_normal(&mut rng) } else { 0.0 };
        values.push(triplet.gamma + diffusion + jumps);
        jump_counts.push(count);
    }
    Ok(IncrementSample {
        values,
        seed,
        stream,
        triplet: *triplet,
        jump_counts,
    })
}

/// One increment per line, shortest round-trip formatting.
pub fn write_increments<W: Write>(values: &[f64], mut out: W) -> std::io::Result<()> {
    for v in values {
        writeln!(out, "{v}")?;
    }
    out.flush()
}

/// Reads one increment per line. Blank lines and lines starting with `#`
/// are skipped, as is a non-numeric first line (a header).
pub fn read_increments<R: BufRead>(input: R) -> Result<Vec<f64>, SampleIoError> {
    let mut values = Vec::new();
    for (index, line) in input.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        // Tolerate a trailing column separator.
        let field = trimmed.split(',').next().unwrap_or("").trim();
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            _ if index == 0 && field.chars().next().is_some_and(|c| c.is_alphabetic()) => continue,
            _ => {
                return Err(SampleIoError::Parse {
                    line: index + 1,
                    content: trimmed.to_string(),
                })
            }
        }
    }
    if values.is_empty() {
        return Err(SampleIoError::Empty);
    }
    Ok(values)
}
