//! Process law: the Lévy triplet, the jump-density families and the
//! nonparametric class bounds.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::quadrature::GaussLegendre;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ModelError {
    #[error("{name} must be {requirement}, got {value}")]
    InvalidParameter {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
}

fn require(name: &'static str, requirement: &'static str, value: f64, ok: bool) -> Result<(), ModelError> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter {
            name,
            requirement,
            value,
        })
    }
}

/// Jump-size density `f` with a closed-form characteristic function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum JumpDensity {
    Gaussian { mean: f64, sd: f64 },
    Laplace { location: f64, scale: f64 },
    /// `f(x) = (rate / 2) exp(-rate |x|)`.
    BilateralExponential { rate: f64 },
    /// Uniform on `[-halfwidth, halfwidth]`.
    UniformSym { halfwidth: f64 },
}

impl JumpDensity {
    pub fn validate(&self) -> Result<(), ModelError> {
        match *self {
            JumpDensity::Gaussian { mean, sd } => {
                require("mean", "finite", mean, true)?;
                require("sd", "positive", sd, sd > 0.0)
            }
            JumpDensity::Laplace { location, scale } => {
                require("location", "finite", location, true)?;
                require("scale", "positive", scale, scale > 0.0)
            }
            JumpDensity::BilateralExponential { rate } => require("rate", "positive", rate, rate > 0.0),
            JumpDensity::UniformSym { halfwidth } => {
                require("halfwidth", "positive", halfwidth, halfwidth > 0.0)
            }
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            JumpDensity::Gaussian { mean, sd } => {
                let z = (x - mean) / sd;
                (-0.5 * z * z).exp() / (sd * (2.0 * PI).sqrt())
            }
            JumpDensity::Laplace { location, scale } => {
                (-(x - location).abs() / scale).exp() / (2.0 * scale)
            }
            JumpDensity::BilateralExponential { rate } => 0.5 * rate * (-rate * x.abs()).exp(),
            JumpDensity::UniformSym { halfwidth } => {
                if x.abs() <= halfwidth {
                    0.5 / halfwidth
                } else {
                    0.0
                }
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            JumpDensity::Gaussian { mean, sd } => 0.5 * erfc(-(x - mean) / (sd * SQRT_2)),
            JumpDensity::Laplace { location, scale } => laplace_cdf((x - location) / scale),
            JumpDensity::BilateralExponential { rate } => laplace_cdf(rate * x),
            JumpDensity::UniformSym { halfwidth } => ((x + halfwidth) / (2.0 * halfwidth)).clamp(0.0, 1.0),
        }
    }

    /// Characteristic function `E[exp(i t W)]`.
    pub fn char_fn(&self, t: f64) -> Complex64 {
        match *self {
            JumpDensity::Gaussian { mean, sd } => {
                Complex64::from_polar((-0.5 * sd * sd * t * t).exp(), mean * t)
            }
            JumpDensity::Laplace { location, scale } => {
                Complex64::from_polar(1.0 / (1.0 + scale * scale * t * t), location * t)
            }
            JumpDensity::BilateralExponential { rate } => {
                Complex64::new(rate * rate / (rate * rate + t * t), 0.0)
            }
            JumpDensity::UniformSym { halfwidth } => Complex64::new(sinc(halfwidth * t), 0.0),
        }
    }

    pub fn second_moment(&self) -> f64 {
        match *self {
            JumpDensity::Gaussian { mean, sd } => sd * sd + mean * mean,
            JumpDensity::Laplace { location, scale } => 2.0 * scale * scale + location * location,
            JumpDensity::BilateralExponential { rate } => 2.0 / (rate * rate),
            JumpDensity::UniformSym { halfwidth } => halfwidth * halfwidth / 3.0,
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            JumpDensity::Gaussian { mean, .. } => mean,
            JumpDensity::Laplace { location, .. } => location,
            _ => 0.0,
        }
    }

    pub fn is_symmetric(&self) -> bool {
        self.mean() == 0.0
    }

    /// Center and half-width of a window outside of which the density is negligible.
    fn effective_window(&self) -> (f64, f64) {
        match *self {
            JumpDensity::Gaussian { mean, sd } => (mean, 40.0 * sd),
            JumpDensity::Laplace { location, scale } => (location, 80.0 * scale),
            JumpDensity::BilateralExponential { rate } => (0.0, 80.0 / rate),
            JumpDensity::UniformSym { halfwidth } => (0.0, halfwidth),
        }
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

fn laplace_cdf(z: f64) -> f64 {
    if z < 0.0 {
        0.5 * z.exp()
    } else {
        1.0 - 0.5 * (-z).exp()
    }
}

/// Complementary error function (Numerical Recipes `erfcc`, relative error < 1.2e-7).
pub(crate) fn erfc(x: f64) -> f64 {
    let z = x.abs();
    let t = 1.0 / (1.0 + 0.5 * z);
    let poly = -z * z - 1.265_512_23
        + t * (1.000_023_68
            + t * (0.374_091_96
                + t * (0.096_784_18
                    + t * (-0.186_288_06
                        + t * (0.278_868_07
                            + t * (-1.135_203_98 + t * (1.488_515_87 + t * (-0.822_152_23 + t * 0.170_872_77))))))));
    let r = t * poly.exp();
    if x >= 0.0 {
        r
    } else {
        2.0 - r
    }
}

/// `(gamma, sigma^2, lambda, f)`: drift, Brownian variance, jump intensity and jump density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevyTriplet {
    pub gamma: f64,
    pub sigma2: f64,
    pub lambda: f64,
    pub jump_density: JumpDensity,
}

impl LevyTriplet {
    pub fn new(gamma: f64, sigma2: f64, lambda: f64, jump_density: JumpDensity) -> Result<Self, ModelError> {
        let triplet = Self {
            gamma,
            sigma2,
            lambda,
            jump_density,
        };
        triplet.validate()?;
        Ok(triplet)
    }

    /// Zero-valued or degenerate components are accepted here; class
    /// membership is checked separately.
    pub fn validate(&self) -> Result<(), ModelError> {
        require("gamma", "finite", self.gamma, true)?;
        require("sigma2", "non-negative", self.sigma2, self.sigma2 >= 0.0)?;
        require("lambda", "non-negative", self.lambda, self.lambda >= 0.0)?;
        self.jump_density.validate()
    }

    pub fn sigma(&self) -> f64 {
        self.sigma2.sqrt()
    }

    /// `phi_X(t) = exp(i gamma t - sigma^2 t^2 / 2 + lambda (phi_f(t) - 1))`.
    pub fn char_fn(&self, t: f64) -> Complex64 {
        let jump = self.jump_density.char_fn(t);
        let exponent = Complex64::new(
            -0.5 * self.sigma2 * t * t + self.lambda * (jump.re - 1.0),
            self.gamma * t + self.lambda * jump.im,
        );
        exponent.exp()
    }

    /// `log |phi_X(t)| = -lambda + lambda Re phi_f(t) - sigma^2 t^2 / 2`.
    pub fn log_modulus(&self, t: f64) -> f64 {
        -self.lambda + self.lambda * self.jump_density.char_fn(t).re - 0.5 * self.sigma2 * t * t
    }

    /// Imaginary part of the distinguished logarithm: `gamma t + lambda Im phi_f(t)`.
    pub fn distinguished_arg(&self, t: f64) -> f64 {
        self.gamma * t + self.lambda * self.jump_density.char_fn(t).im
    }

    /// `rho(x) = lambda f(x)`.
    pub fn levy_density(&self, x: f64) -> f64 {
        self.lambda * self.jump_density.pdf(x)
    }
}

pub fn char_fn_x(t: f64, triplet: &LevyTriplet) -> Complex64 {
    triplet.char_fn(t)
}

pub fn char_fn_f(t: f64, density: &JumpDensity) -> Complex64 {
    density.char_fn(t)
}

pub fn levy_density(x: f64, triplet: &LevyTriplet) -> f64 {
    triplet.levy_density(x)
}

/// Bounds `(beta, L, Lambda, K, Sigma, Gamma, C)` describing the admissible class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassParams {
    pub beta: f64,
    /// Bound on `int |t|^beta |phi_f(t)| dt`.
    #[serde(rename = "L")]
    pub smoothness_bound: f64,
    #[serde(rename = "Lambda")]
    pub intensity_bound: f64,
    /// Bound on the second moment of `f`.
    #[serde(rename = "K")]
    pub moment_bound: f64,
    #[serde(rename = "Sigma")]
    pub sigma_bound: f64,
    #[serde(rename = "Gamma")]
    pub drift_bound: f64,
    /// Bound on `int |t|^(2 beta) |phi_f(t)|^2 dt`.
    #[serde(rename = "C")]
    pub sobolev_bound: f64,
}

impl ClassParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        let fields = [
            ("beta", self.beta),
            ("L", self.smoothness_bound),
            ("Lambda", self.intensity_bound),
            ("K", self.moment_bound),
            ("Sigma", self.sigma_bound),
            ("Gamma", self.drift_bound),
            ("C", self.sobolev_bound),
        ];
        for (name, value) in fields {
            require(name, "strictly positive", value, value > 0.0)?;
        }
        Ok(())
    }
}

/// JSON document carrying a triplet and, optionally, class bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    #[serde(flatten)]
    pub triplet: LevyTriplet,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<ClassParams>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    IntensityBound,
    SigmaRange,
    DriftBound,
    SmoothnessIntegral,
    SobolevIntegral,
    SecondMoment,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub condition: Condition,
    pub value: f64,
    pub bound: f64,
    pub passed: bool,
    /// Set when the improper integral behind `value` did not converge.
    pub divergent: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassReport {
    pub checks: Vec<ConditionCheck>,
}

impl ClassReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn divergence_flagged(&self) -> bool {
        self.checks.iter().any(|c| c.divergent)
    }

    pub fn get(&self, condition: Condition) -> Option<&ConditionCheck> {
        self.checks.iter().find(|c| c.condition == condition)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ImproperIntegral {
    Converged(f64),
    /// Partial value reached at truncation point `t_max`.
    Divergent { partial: f64, t_max: f64 },
}

impl ImproperIntegral {
    pub fn value(&self) -> f64 {
        match *self {
            ImproperIntegral::Converged(v) => v,
            ImproperIntegral::Divergent { partial, .. } => partial,
        }
    }
}

const MAX_DOUBLINGS: usize = 120;

/// `int_0^inf g(t) dt` for a non-negative integrand, truncating at a `T` that is
/// doubled until the contribution of `[T, 2T]` is negligible.
///
/// Increments that fail to shrink across doublings mark the integral divergent;
/// a geometrically shrinking increment sequence is summed in closed form.
pub fn half_line_integral<F: Fn(f64) -> f64>(g: F) -> ImproperIntegral {
    let gl = GaussLegendre::new(8);
    let mut upper = 4.0;
    // Dyadic panels toward the origin resolve |t|^beta cusps.
    let mut total: f64 = (0..60)
        .map(|k| {
            let hi = upper * 0.5f64.powi(k);
            gl.integrate(&g, 0.5 * hi, hi, 2)
        })
        .sum();
    let mut prev_increment: Option<f64> = None;
    let mut prev_ratio: Option<f64> = None;
    let mut stalled = 0;
    for _ in 0..MAX_DOUBLINGS {
        let panels = ((4.0 * upper).ceil() as usize).clamp(16, 4096);
        let increment = gl.integrate(&g, upper, 2.0 * upper, panels);
        let envelope = (0..=32)
            .map(|k| g(upper * (1.0 + k as f64 / 32.0)).abs())
            .fold(0.0, f64::max);
        total += increment;
        upper *= 2.0;

        if envelope < 1e-14 && increment.abs() <= 1e-12 * total.abs().max(f64::MIN_POSITIVE) {
            return ImproperIntegral::Converged(total);
        }
        if let Some(prev) = prev_increment {
            let ratio = if prev > 0.0 { increment / prev } else { f64::INFINITY };
            if upper >= 64.0 && ratio >= 0.95 {
                stalled += 1;
                if stalled >= 3 {
                    return ImproperIntegral::Divergent { partial: total, t_max: upper };
                }
            } else {
                stalled = 0;
            }
            if let Some(pr) = prev_ratio {
                if ratio < 0.9 && pr < 0.9 && ratio > 0.0 {
                    let tail = increment * ratio / (1.0 - ratio);
                    if tail <= 1e-10 * total.abs() {
                        return ImproperIntegral::Converged(total + tail);
                    }
                }
            }
            prev_ratio = Some(ratio);
        }
        if increment == 0.0 && envelope == 0.0 {
            return ImproperIntegral::Converged(total);
        }
        prev_increment = Some(increment);
    }
    ImproperIntegral::Divergent {
        partial: total,
        t_max: upper,
    }
}

/// `int_R g(t) dt` as the sum of the two half lines.
pub fn real_line_integral<F: Fn(f64) -> f64>(g: F) -> ImproperIntegral {
    let right = half_line_integral(&g);
    let left = half_line_integral(|t| g(-t));
    match (right, left) {
        (ImproperIntegral::Converged(a), ImproperIntegral::Converged(b)) => ImproperIntegral::Converged(a + b),
        (r, l) => ImproperIntegral::Divergent {
            partial: r.value() + l.value(),
            t_max: match (r, l) {
                (ImproperIntegral::Divergent { t_max, .. }, _) => t_max,
                (_, ImproperIntegral::Divergent { t_max, .. }) => t_max,
                _ => unreachable!(),
            },
        },
    }
}

fn integral_check(condition: Condition, integral: ImproperIntegral, bound: f64) -> ConditionCheck {
    match integral {
        ImproperIntegral::Converged(value) => ConditionCheck {
            condition,
            value,
            bound,
            passed: value <= bound,
            divergent: false,
        },
        ImproperIntegral::Divergent { partial, .. } => ConditionCheck {
            condition,
            value: partial,
            bound,
            passed: false,
            divergent: true,
        },
    }
}

fn bound_check(condition: Condition, value: f64, bound: f64, passed: bool) -> ConditionCheck {
    ConditionCheck {
        condition,
        value,
        bound,
        passed,
        divergent: false,
    }
}

/// Evaluates every class condition for `triplet` numerically.
pub fn check_class_membership(triplet: &LevyTriplet, params: &ClassParams) -> ClassReport {
    let f = triplet.jump_density;
    let beta = params.beta;
    let sigma = triplet.sigma();

    let smoothness = half_line_integral(|t| t.powf(beta) * f.char_fn(t).norm()).map(|v| 2.0 * v);
    let sobolev = half_line_integral(|t| t.powf(2.0 * beta) * f.char_fn(t).norm_sqr()).map(|v| 2.0 * v);
    let (center, width) = f.effective_window();
    let gl = GaussLegendre::new(16);
    let moment = gl.integrate(|x| x * x * f.pdf(x), center - width, center + width, 2048);

    ClassReport {
        checks: vec![
            bound_check(
                Condition::IntensityBound,
                triplet.lambda,
                params.intensity_bound,
                triplet.lambda > 0.0 && triplet.lambda <= params.intensity_bound,
            ),
            bound_check(
                Condition::SigmaRange,
                sigma,
                params.sigma_bound,
                sigma > 0.0 && sigma <= params.sigma_bound,
            ),
            bound_check(
                Condition::DriftBound,
                triplet.gamma.abs(),
                params.drift_bound,
                triplet.gamma.abs() <= params.drift_bound,
            ),
            integral_check(Condition::SmoothnessIntegral, smoothness, params.smoothness_bound),
            integral_check(Condition::SobolevIntegral, sobolev, params.sobolev_bound),
            bound_check(Condition::SecondMoment, moment, params.moment_bound, moment <= params.moment_bound),
        ],
    }
}

impl ImproperIntegral {
    fn map<F: Fn(f64) -> f64>(self, op: F) -> Self {
        match self {
            ImproperIntegral::Converged(v) => ImproperIntegral::Converged(op(v)),
            ImproperIntegral::Divergent { partial, t_max } => ImproperIntegral::Divergent {
                partial: op(partial),
                t_max,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian() -> JumpDensity {
        JumpDensity::Gaussian { mean: 0.0, sd: 1.0 }
    }

    fn generous() -> ClassParams {
        ClassParams {
            beta: 1.0,
            smoothness_bound: 10.0,
            intensity_bound: 5.0,
            moment_bound: 10.0,
            sigma_bound: 5.0,
            drift_bound: 5.0,
            sobolev_bound: 10.0,
        }
    }

    #[test]
    fn char_fn_at_zero_is_one() {
        let t = LevyTriplet::new(0.3, 0.7, 1.5, JumpDensity::Laplace { location: 0.2, scale: 0.5 }).unwrap();
        assert_eq!(t.char_fn(0.0), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn pure_drift_is_a_rotation() {
        let t = LevyTriplet::new(1.0, 0.0, 0.0, gaussian()).unwrap();
        let v = t.char_fn(1.0);
        assert!((v - Complex64::new(1f64.cos(), 1f64.sin())).norm() < 1e-15);
    }

    #[test]
    fn gaussian_jumps_char_fn() {
        let t = LevyTriplet::new(0.0, 1.0, 1.0, gaussian()).unwrap();
        let expected = (-0.5 + (-0.5f64).exp() - 1.0).exp();
        let v = t.char_fn(1.0);
        assert!((v.re - expected).abs() < 1e-15);
        assert_eq!(v.im, 0.0);
    }

    #[test]
    fn jump_char_fn_examples() {
        assert_eq!(gaussian().char_fn(0.0), Complex64::new(1.0, 0.0));
        assert!((gaussian().char_fn(1.0).re - (-0.5f64).exp()).abs() < 1e-15);
        let laplace = JumpDensity::Laplace { location: 0.0, scale: 1.0 };
        assert!((laplace.char_fn(1.0).re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn char_fn_matches_numerical_fourier_transform() {
        let gl = GaussLegendre::new(16);
        let families = [
            gaussian(),
            JumpDensity::Gaussian { mean: 0.4, sd: 0.7 },
            JumpDensity::Laplace { location: -0.3, scale: 0.8 },
            JumpDensity::BilateralExponential { rate: 2.0 },
        ];
        for f in families {
            let (c, w) = f.effective_window();
            for &t in &[0.5, 1.0, 2.5] {
                let re = gl.integrate(|x| (t * x).cos() * f.pdf(x), c - w, c, 4096)
                    + gl.integrate(|x| (t * x).cos() * f.pdf(x), c, c + w, 4096);
                let im = gl.integrate(|x| (t * x).sin() * f.pdf(x), c - w, c, 4096)
                    + gl.integrate(|x| (t * x).sin() * f.pdf(x), c, c + w, 4096);
                let phi = f.char_fn(t);
                assert!((phi.re - re).abs() < 1e-10, "{f:?} t={t}");
                assert!((phi.im - im).abs() < 1e-10, "{f:?} t={t}");
            }
        }
        let u = JumpDensity::UniformSym { halfwidth: 1.5 };
        let re = gl.integrate(|x| (2.0 * x).cos() / 3.0, -1.5, 1.5, 64);
        assert!((u.char_fn(2.0).re - re).abs() < 1e-13);
    }

    #[test]
    fn levy_density_examples() {
        let zero = LevyTriplet::new(0.0, 1.0, 0.0, gaussian()).unwrap();
        assert_eq!(zero.levy_density(0.3), 0.0);
        let two = LevyTriplet::new(0.0, 1.0, 2.0, gaussian()).unwrap();
        assert!((two.levy_density(0.0) - 2.0 / (2.0 * PI).sqrt()).abs() < 1e-15);
        let unif = LevyTriplet::new(0.0, 1.0, 1.0, JumpDensity::UniformSym { halfwidth: 1.0 }).unwrap();
        assert_eq!(unif.levy_density(2.0), 0.0);
    }

    #[test]
    fn constructor_rejects_negatives() {
        assert!(LevyTriplet::new(0.0, -1.0, 1.0, gaussian()).is_err());
        assert!(LevyTriplet::new(0.0, 1.0, -0.1, gaussian()).is_err());
        assert!(LevyTriplet::new(0.0, 1.0, 1.0, JumpDensity::Gaussian { mean: 0.0, sd: 0.0 }).is_err());
        assert!(LevyTriplet::new(0.0, 0.0, 0.0, gaussian()).is_ok());
    }

    #[test]
    fn cdf_is_consistent_with_pdf() {
        let gl = GaussLegendre::new(16);
        for f in [
            gaussian(),
            JumpDensity::Laplace { location: 0.5, scale: 2.0 },
            JumpDensity::BilateralExponential { rate: 1.5 },
            JumpDensity::UniformSym { halfwidth: 2.0 },
        ] {
            let x = 0.7;
            let lower = match f {
                JumpDensity::UniformSym { halfwidth } => -halfwidth,
                _ => -60.0,
            };
            let numeric = gl.integrate(|s| f.pdf(s), lower, x, 8192);
            assert!((f.cdf(x) - numeric).abs() < 1e-6, "{f:?}");
        }
    }

    #[test]
    fn class_membership_gaussian_passes() {
        let t = LevyTriplet::new(1.0, 1.0, 1.0, gaussian()).unwrap();
        let report = check_class_membership(&t, &generous());
        assert!(report.all_passed(), "{report:?}");
        // int |t| e^{-t^2/2} dt = 2, int t^2 e^{-t^2} dt = sqrt(pi)/2.
        let smooth = report.get(Condition::SmoothnessIntegral).unwrap().value;
        assert!((smooth - 2.0).abs() < 1e-10, "{smooth}");
        let sob = report.get(Condition::SobolevIntegral).unwrap().value;
        assert!((sob - PI.sqrt() / 2.0).abs() < 1e-10, "{sob}");
        let moment = report.get(Condition::SecondMoment).unwrap().value;
        assert!((moment - 1.0).abs() < 1e-10);
    }

    #[test]
    fn class_membership_intensity_failure() {
        let params = generous();
        let t = LevyTriplet::new(0.0, 1.0, params.intensity_bound + 1.0, gaussian()).unwrap();
        let report = check_class_membership(&t, &params);
        assert!(!report.get(Condition::IntensityBound).unwrap().passed);
        assert!(report.get(Condition::SigmaRange).unwrap().passed);
    }

    #[test]
    fn uniform_jumps_flag_divergence() {
        let t = LevyTriplet::new(0.0, 1.0, 1.0, JumpDensity::UniformSym { halfwidth: 1.0 }).unwrap();
        let report = check_class_membership(&t, &generous());
        let smooth = report.get(Condition::SmoothnessIntegral).unwrap();
        assert!(smooth.divergent && !smooth.passed);
        assert!(report.divergence_flagged());
    }

    #[test]
    fn laplace_tail_convergence_depends_on_beta() {
        let laplace = JumpDensity::Laplace { location: 0.0, scale: 1.0 };
        // int |t|^beta / (1 + t^2) dt = pi / cos(pi beta / 2) for beta < 1.
        let beta: f64 = 0.5;
        let v = real_line_integral(|t| t.abs().powf(beta) * laplace.char_fn(t).norm());
        let exact = PI / (PI * beta / 2.0).cos();
        match v {
            ImproperIntegral::Converged(value) => assert!((value - exact).abs() < 1e-6 * exact, "{value} vs {exact}"),
            other => panic!("expected convergence, got {other:?}"),
        }
        let diverging = real_line_integral(|t| t.abs() * laplace.char_fn(t).norm());
        assert!(matches!(diverging, ImproperIntegral::Divergent { .. }));
    }

    #[test]
    fn document_json_round_trip() {
        let json = r#"{"gamma":1.0,"sigma2":1.0,"lambda":1.0,
            "jump_density":{"family":"gaussian","params":{"mean":0.0,"sd":1.0}},
            "class":{"beta":1.0,"L":10,"Lambda":2,"K":10,"Sigma":2,"Gamma":2,"C":10}}"#;
        let doc: ModelDocument = serde_json::from_str(json).unwrap();
        assert_eq!(doc.triplet.jump_density, gaussian());
        assert_eq!(doc.class.unwrap().intensity_bound, 2.0);
        let back: ModelDocument = serde_json::from_str(&serde_json::to_string(&doc).unwrap()).unwrap();
        assert_eq!(back, doc);
    }

    #[test]
    fn erfc_reference_values() {
        assert!((erfc(0.0) - 1.0).abs() < 1e-7);
        assert!((erfc(1.0) - 0.157_299_207_050_285_1).abs() < 2e-7);
        assert!((erfc(-1.0) - 1.842_700_792_949_715).abs() < 2e-7);
    }
}
