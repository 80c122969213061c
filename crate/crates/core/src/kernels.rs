//! Spectral weight functions `v`, `u`, `w` on `[-1, 1]` and the closed-form
//! Fourier-inversion terms of the sinc cutoff.
//!
//! `v` isolates the Gaussian variance, `u` the jump intensity and `w` the drift.
//! Each is a polynomial whose lowest power is at least `beta`, so that it
//! vanishes at the origin to the order required by the smoothness class.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::quadrature::simpson_fn;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum KernelError {
    #[error("beta must be positive and finite, got {0}")]
    InvalidBeta(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelKind {
    /// Weight for the Gaussian variance.
    V,
    /// Weight for the jump intensity.
    U,
    /// Weight for the drift.
    W,
}

impl KernelKind {
    /// Power of `h` in the bandwidth-scaled kernel `h^s k(h t)`.
    pub fn scale_power(self) -> i32 {
        match self {
            KernelKind::V => 3,
            KernelKind::U => 1,
            KernelKind::W => 2,
        }
    }
}

/// Polynomial supported on `[-1, 1]`, stored as `(exponent, coefficient)` terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralKernel {
    pub kind: KernelKind,
    pub beta: f64,
    pub terms: Vec<(u32, f64)>,
}

impl SpectralKernel {
    pub fn eval(&self, t: f64) -> f64 {
        if t.abs() > 1.0 {
            return 0.0;
        }
        self.terms.iter().map(|&(e, c)| c * t.powi(e as i32)).sum()
    }

    /// Bandwidth-scaled kernel `h^s k(h t)`, supported on `[-1/h, 1/h]`.
    pub fn scaled(&self, t: f64, h: f64) -> f64 {
        h.powi(self.kind.scale_power()) * self.eval(h * t)
    }

    pub fn min_exponent(&self) -> u32 {
        self.terms.iter().map(|&(e, _)| e).min().unwrap_or(0)
    }

    pub fn coefficient_l1(&self) -> f64 {
        self.terms.iter().map(|&(_, c)| c.abs()).sum()
    }
}

fn half_order(beta: f64) -> Result<u32, KernelError> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(KernelError::InvalidBeta(beta));
    }
    Ok(((beta / 2.0).ceil() as u32).max(1))
}

/// `v(t) = a t^{2p} + b t^{2p+2}` with `int v = 0` and `int (-t^2/2) v = 1`.
///
/// With `A = 2p+1, B = 2p+3, C = 2p+5` the solution is `a = ABC/4`, `b = -B^2 C/4`
/// (the determinant `AC - B^2` is always `-4`).
pub fn build_kernel_v(beta: f64) -> Result<SpectralKernel, KernelError> {
    let p = half_order(beta)?;
    let (a_, b_, c_) = odd_triple(p);
    Ok(SpectralKernel {
        kind: KernelKind::V,
        beta,
        terms: vec![(2 * p, a_ * b_ * c_ / 4.0), (2 * p + 2, -b_ * b_ * c_ / 4.0)],
    })
}

/// `u(t) = a t^{2p} + b t^{2p+2}` with `int u = -1` and `int t^2 u = 0`:
/// `a = -AB^2/8`, `b = ABC/8`.
pub fn build_kernel_u(beta: f64) -> Result<SpectralKernel, KernelError> {
    let p = half_order(beta)?;
    let (a_, b_, c_) = odd_triple(p);
    Ok(SpectralKernel {
        kind: KernelKind::U,
        beta,
        terms: vec![(2 * p, -a_ * b_ * b_ / 8.0), (2 * p + 2, a_ * b_ * c_ / 8.0)],
    })
}

/// `w(t) = (2p+3)/2 t^{2p+1}`, so that `int t w = 1`.
pub fn build_kernel_w(beta: f64) -> Result<SpectralKernel, KernelError> {
    let p = half_order(beta)?;
    Ok(SpectralKernel {
        kind: KernelKind::W,
        beta,
        terms: vec![(2 * p + 1, (2 * p + 3) as f64 / 2.0)],
    })
}

fn odd_triple(p: u32) -> (f64, f64, f64) {
    let p = p as f64;
    (2.0 * p + 1.0, 2.0 * p + 3.0, 2.0 * p + 5.0)
}

/// The three kernels for a given smoothness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSet {
    pub v: SpectralKernel,
    pub u: SpectralKernel,
    pub w: SpectralKernel,
}

impl KernelSet {
    pub fn build(beta: f64) -> Result<Self, KernelError> {
        Ok(Self {
            v: build_kernel_v(beta)?,
            u: build_kernel_u(beta)?,
            w: build_kernel_w(beta)?,
        })
    }
}

/// Nodes used by [`verify_moments`].
pub const MOMENT_NODES: usize = 10_001;
pub const MOMENT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub kind: KernelKind,
    /// `(description, residual)` per imposed moment.
    pub residuals: Vec<(String, f64)>,
    pub passed: bool,
}

impl MomentReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|(_, r)| *r).fold(0.0, f64::max)
    }
}

pub fn verify_moments(kernel: &SpectralKernel) -> MomentReport {
    let moment = |g: &dyn Fn(f64) -> f64| simpson_fn(|t| g(t) * kernel.eval(t), -1.0, 1.0, MOMENT_NODES - 1);
    let residuals = match kernel.kind {
        KernelKind::V => vec![
            ("|int v|".to_string(), moment(&|_| 1.0).abs()),
            ("|int (-t^2/2) v - 1|".to_string(), (moment(&|t| -0.5 * t * t) - 1.0).abs()),
        ],
        KernelKind::U => vec![
            ("|int u + 1|".to_string(), (moment(&|_| 1.0) + 1.0).abs()),
            ("|int t^2 u|".to_string(), moment(&|t| t * t).abs()),
        ],
        KernelKind::W => vec![("|int t w - 1|".to_string(), (moment(&|t| t) - 1.0).abs())],
    };
    let passed = residuals.iter().all(|(_, r)| *r < MOMENT_TOLERANCE);
    MomentReport {
        kind: kernel.kind,
        residuals,
        passed,
    }
}

/// Below this `|x T|` the Dirichlet terms are summed from their Taylor series.
pub const DIRICHLET_SERIES_THRESHOLD: f64 = 1.0;

/// `(1/2pi) int_{-T}^{T} exp(-i t x) t^order dt` for `order` in `{0, 1, 2}`.
///
/// Orders 0 and 2 are real, order 1 is purely imaginary.
pub fn dirichlet_term(order: u32, x: f64, cutoff: f64) -> Complex64 {
    assert!(order <= 2, "dirichlet_term supports orders 0, 1, 2");
    let t = cutoff;
    let z = x * t;
    if z.abs() < DIRICHLET_SERIES_THRESHOLD {
        return dirichlet_series(order, x, t);
    }
    dirichlet_closed(order, x, t)
}

fn dirichlet_closed(order: u32, x: f64, t: f64) -> Complex64 {
    let (s, c) = (x * t).sin_cos();
    match order {
        0 => Complex64::new(s / (PI * x), 0.0),
        // -(i/pi) int_0^T t sin(t x) dt
        1 => Complex64::new(0.0, -(s / (x * x) - t * c / x) / PI),
        // (1/pi) int_0^T t^2 cos(t x) dt
        _ => Complex64::new((t * t * s / x + 2.0 * t * c / (x * x) - 2.0 * s / (x * x * x)) / PI, 0.0),
    }
}

/// Term-by-term integration of the cosine/sine series.
fn dirichlet_series(order: u32, x: f64, t: f64) -> Complex64 {
    let z2 = (x * t) * (x * t);
    // sum_j (-1)^j z^{2j} / (k_j! (2j + order + 1)) with k_j = 2j (cos) or 2j + 1 (sin)
    let odd = order == 1;
    let mut term = 1.0;
    let mut sum = 0.0;
    for j in 0..40u32 {
        let j = j as f64;
        let denom = 2.0 * j + order as f64 + 1.0 + if odd { 1.0 } else { 0.0 };
        let contrib = term / denom;
        sum += contrib;
        if contrib.abs() < 1e-18 * sum.abs() {
            break;
        }
        let (a, b) = if odd {
            (2.0 * j + 2.0, 2.0 * j + 3.0)
        } else {
            (2.0 * j + 1.0, 2.0 * j + 2.0)
        };
        term *= -z2 / (a * b);
    }
    match order {
        0 => Complex64::new(t * sum / PI, 0.0),
        1 => Complex64::new(0.0, -x * t.powi(3) * sum / PI),
        _ => Complex64::new(t.powi(3) * sum / PI, 0.0),
    }
}
