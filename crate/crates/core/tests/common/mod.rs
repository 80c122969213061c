//! Test-only oracles, kept independent of the library's grid quadrature.

#![allow(dead_code)]

use levy_spectral::model::{ClassParams, JumpDensity, LevyTriplet};

const KRONROD_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = KRONROD_WEIGHTS[7] * fc;
    let mut gauss = GAUSS_WEIGHTS[3] * fc;
    for i in 0..7 {
        let dx = half * KRONROD_NODES[i];
        let pair = f(center - dx) + f(center + dx);
        kronrod += KRONROD_WEIGHTS[i] * pair;
        if i % 2 == 1 {
            gauss += GAUSS_WEIGHTS[i / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (value, err) = gk15(f, a, b);
    if err <= tol || depth == 0 {
        return value;
    }
    let mid = 0.5 * (a + b);
    adaptive(f, a, mid, 0.5 * tol, depth - 1) + adaptive(f, mid, b, 0.5 * tol, depth - 1)
}

/// Adaptive Gauss-Kronrod (7/15) integral of `f` on `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    // Pre-split so oscillatory integrands start from resolvable panels.
    let pieces = ((b - a).abs().ceil() as usize).clamp(1, 4096);
    let width = (b - a) / pieces as f64;
    (0..pieces)
        .map(|k| {
            let lo = a + width * k as f64;
            adaptive(&f, lo, lo + width, 1e-14, 40)
        })
        .sum()
}

/// `v(s) = (105/4) s^2 - (175/4) s^4` scaled as `h^3 v(h t)`.
pub fn v_h(t: f64, h: f64) -> f64 {
    let s = h * t;
    if s.abs() > 1.0 {
        return 0.0;
    }
    h.powi(3) * (105.0 / 4.0 * s * s - 175.0 / 4.0 * s.powi(4))
}

/// `u(s) = -(75/8) s^2 + (105/8) s^4` scaled as `h u(h t)`.
pub fn u_h(t: f64, h: f64) -> f64 {
    let s = h * t;
    if s.abs() > 1.0 {
        return 0.0;
    }
    h * (-75.0 / 8.0 * s * s + 105.0 / 8.0 * s.powi(4))
}

/// `w(s) = (5/2) s^3` scaled as `h^2 w(h t)`.
pub fn w_h(t: f64, h: f64) -> f64 {
    let s = h * t;
    if s.abs() > 1.0 {
        return 0.0;
    }
    h * h * 2.5 * s.powi(3)
}

pub fn gaussian(mean: f64, sd: f64) -> JumpDensity {
    JumpDensity::Gaussian { mean, sd }
}

pub fn laplace(location: f64, scale: f64) -> JumpDensity {
    JumpDensity::Laplace { location, scale }
}

/// Triplet used by the Monte Carlo reference plan.
pub fn reference_triplet() -> LevyTriplet {
    LevyTriplet::new(1.0, 1.0, 1.0, gaussian(0.0, 1.0)).unwrap()
}

pub fn reference_class() -> ClassParams {
    ClassParams {
        beta: 1.0,
        smoothness_bound: 10.0,
        intensity_bound: 2.0,
        moment_bound: 10.0,
        sigma_bound: 2.0,
        drift_bound: 2.0,
        sobolev_bound: 10.0,
    }
}

/// Gaussian and Laplace jumps, symmetric and shifted, over the intensity
/// and variance levels used by the bias-identity checks.
pub fn bias_triplets() -> Vec<LevyTriplet> {
    vec![
        LevyTriplet::new(0.3, 0.5, 0.5, gaussian(0.0, 1.0)).unwrap(),
        LevyTriplet::new(-0.2, 1.0, 1.0, gaussian(0.5, 0.8)).unwrap(),
        LevyTriplet::new(1.0, 0.5, 2.0, laplace(0.0, 1.0)).unwrap(),
        LevyTriplet::new(0.0, 1.0, 1.0, laplace(0.3, 0.7)).unwrap(),
        LevyTriplet::new(0.5, 1.0, 2.0, gaussian(-0.4, 1.2)).unwrap(),
    ]
}

#[cfg(test)]
mod self_check {
    use super::*;

    #[test]
    fn oracle_integrates_known_functions() {
        assert!((integrate(|x| x.cos(), 0.0, std::f64::consts::PI / 2.0) - 1.0).abs() < 1e-14);
        let g = integrate(|x| (-x * x).exp(), -10.0, 10.0);
        assert!((g - std::f64::consts::PI.sqrt()).abs() < 1e-13);
    }
}
