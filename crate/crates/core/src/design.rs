//! Fixed-precision sample sizes.
//!
//! The requirement is that the product-of-means estimator with k pairs have
//! 2·std ≤ γN, i.e. k solves
//!
//! ```text
//! 4q(Np + m + q/k) = N k m p γ²
//! ```
//!
//! Substituting ξ = q/k gives ξ² + (Np + m)ξ - Nmpγ²/4 = 0, whose positive
//! root yields the oracle size K⁰ = ⌊q/ξ⌋ + 1. Replacing (N, p) by pilot
//! estimates (X̄T̄/m, m/T̄) gives the plug-in size K_TS used by the two-stage
//! and sequential procedures.

use serde::{Deserialize, Serialize};

use crate::distributions::ModelParams;
use crate::error::{domain, Error, Result};
use crate::normal::{normal_pdf, std_normal_cdf, two_sided_z};
use crate::quadrature::{integrate, Tolerance};

/// Multiplier c in the precision criterion c·std ≤ γN.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Multiplier {
    /// c = 2.
    #[default]
    Two,
    /// c = z_{1-α/2} for the `alpha` carried by the spec.
    NormalQuantile,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrecisionSpec {
    pub gamma: f64,
    pub alpha: f64,
    pub multiplier: Multiplier,
}

impl PrecisionSpec {
    pub fn new(gamma: f64) -> Result<Self> {
        let spec = Self {
            gamma,
            alpha: 0.05,
            multiplier: Multiplier::Two,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_normal_multiplier(gamma: f64, alpha: f64) -> Result<Self> {
        let spec = Self {
            gamma,
            alpha,
            multiplier: Multiplier::NormalQuantile,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(domain(format!("gamma must lie in (0, 1), got {}", self.gamma)));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(domain(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        Ok(())
    }

    /// The γ that, used with the multiplier-2 formulas, encodes this spec:
    /// c·std ≤ γN ⇔ 2·std ≤ (2γ/c)N.
    pub fn effective_gamma(&self) -> Result<f64> {
        self.validate()?;
        match self.multiplier {
            Multiplier::Two => Ok(self.gamma),
            Multiplier::NormalQuantile => Ok(2.0 * self.gamma / two_sided_z(self.alpha)?),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleSizeResult {
    /// ⌊k⌋ + 1.
    pub k_value: u64,
    /// The unfloored root k = q/ξ.
    pub k_exact: f64,
    pub xi: f64,
    /// (4q(Np + m + q/k) - Nkmpγ²) / (Nkmpγ²) at the unfloored root.
    pub residual: f64,
}

/// (√(1 + ε) - 1) without cancellation for small ε.
fn sqrt1p_minus_one(eps: f64) -> f64 {
    eps / ((1.0 + eps).sqrt() + 1.0)
}

fn floor_plus_one(k: f64) -> u64 {
    k.floor() as u64 + 1
}

/// K⁰ for known (N, p).
pub fn k_oracle(params: &ModelParams, precision: &PrecisionSpec) -> Result<SampleSizeResult> {
    params.validate()?;
    let gamma = precision.effective_gamma()?;
    let (n, p, q, m) = (params.n(), params.p, params.q(), params.mf());
    let a = n * p + m;
    let b = n * m * p * gamma * gamma;
    let xi = a * sqrt1p_minus_one(b / (a * a)) / 2.0;
    let k = q / xi;
    let rhs = n * k * m * p * gamma * gamma;
    let residual = (4.0 * q * (n * p + m + q / k) - rhs) / rhs;
    Ok(SampleSizeResult {
        k_value: floor_plus_one(k),
        k_exact: k,
        xi,
        residual,
    })
}

/// A(ȳ) = 2ȳ/(ȳ + m) with ȳ = t̄ - m.
fn numerator_factor(y_bar: f64, m: f64) -> f64 {
    2.0 * y_bar / (y_bar + m)
}

/// B(x̄) = (x̄ + m)(√(1 + x̄mγ²/(x̄ + m)²) - 1).
fn denominator_factor(x_bar: f64, m: f64, gamma: f64) -> f64 {
    let a = x_bar + m;
    a * sqrt1p_minus_one(x_bar * m * gamma * gamma / (a * a))
}

/// Unfloored plug-in size A(t̄ - m)/B(x̄).
pub fn k_two_stage_exact(x_bar: f64, t_bar: f64, m: u64, gamma: f64) -> Result<f64> {
    if m < 1 {
        return Err(domain("m must be at least 1"));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(domain(format!("gamma must lie in (0, 1), got {gamma}")));
    }
    let mf = m as f64;
    if !(t_bar >= mf) {
        return Err(domain(format!("mean waiting time {t_bar} is below m = {m}")));
    }
    if !(x_bar >= 0.0) {
        return Err(domain(format!("mean binomial count must be >= 0, got {x_bar}")));
    }
    if x_bar == 0.0 {
        return Err(Error::DegeneratePilot { redraws: 0 });
    }
    Ok(numerator_factor(t_bar - mf, mf) / denominator_factor(x_bar, mf, gamma))
}

/// K_TS = ⌊2(t̄ - m) / (t̄ (x̄ + m)(√(1 + x̄mγ²/(x̄ + m)²) - 1))⌋ + 1.
///
/// A zero binomial mean carries no information about N and is reported as
/// [`Error::DegeneratePilot`].
pub fn k_two_stage(x_bar: f64, t_bar: f64, m: u64, gamma: f64) -> Result<u64> {
    k_two_stage_exact(x_bar, t_bar, m, gamma).map(floor_plus_one)
}

/// Asymptotic mean and standard deviation of the unfloored K_TS(K₁).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KtsMoments {
    pub mean: f64,
    pub std: f64,
}

/// Smallest pilot for which the normal approximation is offered.
pub const MIN_ASYMPTOTIC_PILOT: u64 = 30;

/// Half-width of the integration window, in standard deviations.
const WINDOW_SDS: f64 = 8.0;

fn quad_tolerance() -> Tolerance {
    Tolerance {
        abs: 1e-6,
        rel: 1e-13,
        max_intervals: 4000,
    }
}

/// E(K_TS) = E(A(Ȳ))·E(1/B(X̄)) and the matching second moment, with
/// Ȳ ~ N(mq/p, mq/(p²K₁)) and X̄ ~ N(Np, Npq/K₁) independent; each factor is
/// integrated over ±8 standard deviations.
pub fn expected_k_two_stage(
    params: &ModelParams,
    precision: &PrecisionSpec,
    k1: u64,
) -> Result<KtsMoments> {
    params.validate()?;
    let gamma = precision.effective_gamma()?;
    if k1 < MIN_ASYMPTOTIC_PILOT {
        return Err(domain(format!(
            "the normal approximation needs a pilot of at least {MIN_ASYMPTOTIC_PILOT}, got {k1}"
        )));
    }
    let (n, p, q, m) = (params.n(), params.p, params.q(), params.mf());
    let k1 = k1 as f64;

    let y_mean = m * q / p;
    let y_sd = (m * q / (p * p * k1)).sqrt();
    let x_mean = n * p;
    let x_sd = (n * p * q / k1).sqrt();
    guard_positive_window(x_mean, x_sd, "pilot binomial mean")?;

    let (y_lo, y_hi) = window(y_mean, y_sd, -m);
    let (x_lo, x_hi) = window(x_mean, x_sd, 0.0);
    let tol = quad_tolerance();

    let ya = integrate(|y| numerator_factor(y, m) * normal_pdf(y, y_mean, y_sd), y_lo, y_hi, tol)?;
    let ya2 = integrate(
        |y| numerator_factor(y, m).powi(2) * normal_pdf(y, y_mean, y_sd),
        y_lo,
        y_hi,
        tol,
    )?;
    let xb = integrate(
        |x| normal_pdf(x, x_mean, x_sd) / denominator_factor(x, m, gamma),
        x_lo,
        x_hi,
        tol,
    )?;
    let xb2 = integrate(
        |x| normal_pdf(x, x_mean, x_sd) / denominator_factor(x, m, gamma).powi(2),
        x_lo,
        x_hi,
        tol,
    )?;

    let mean = ya.value * xb.value;
    let second = ya2.value * xb2.value;
    Ok(KtsMoments {
        mean,
        std: (second - mean * mean).max(0.0).sqrt(),
    })
}

/// P(X̄ ≤ 0) under the normal approximation must be negligible, since 1/B is
/// singular there and the window is clipped to positive values.
fn guard_positive_window(mean: f64, sd: f64, what: &str) -> Result<()> {
    let mass_below_zero = std_normal_cdf(-mean / sd);
    if mass_below_zero > 1e-12 {
        return Err(domain(format!(
            "{what}: normal approximation puts {mass_below_zero:e} mass at or below zero"
        )));
    }
    Ok(())
}

/// mean ± 8 sd, with the lower end kept strictly above `floor`.
fn window(mean: f64, sd: f64, floor: f64) -> (f64, f64) {
    let lo = (mean - WINDOW_SDS * sd).max(floor + 1e-12 * (1.0 + floor.abs()));
    (lo, mean + WINDOW_SDS * sd)
}

/// Coverage of the proportional-closeness interval [(1-γ)N̄, (1+γ)N̄] at a
/// final size `k_ts`:
///
/// ```text
/// CP = P{ Nm/((1+γ)X̄) - m ≤ Ȳ ≤ Nm/((1-γ)X̄) - m }
/// ```
///
/// with X̄ and Ȳ normal with variances scaled by 1/k_ts. The inner
/// probability is a difference of Φ values; the outer integral runs over
/// ±8 standard deviations of X̄.
pub fn coverage_two_stage(params: &ModelParams, gamma: f64, k_ts: u64) -> Result<f64> {
    params.validate()?;
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(domain(format!("gamma must lie in (0, 1), got {gamma}")));
    }
    if k_ts < 1 {
        return Err(domain("final sample size must be at least 1"));
    }
    let (n, p, q, m) = (params.n(), params.p, params.q(), params.mf());
    let k = k_ts as f64;
    let y_mean = m * q / p;
    let y_sd = (m * q / (p * p * k)).sqrt();
    let x_mean = n * p;
    let x_sd = (n * p * q / k).sqrt();
    guard_positive_window(x_mean, x_sd, "final binomial mean")?;
    let (x_lo, x_hi) = window(x_mean, x_sd, 0.0);

    let inner = |x: f64| {
        let lower = n * m / ((1.0 + gamma) * x) - m;
        let upper = n * m / ((1.0 - gamma) * x) - m;
        let prob = std_normal_cdf((upper - y_mean) / y_sd) - std_normal_cdf((lower - y_mean) / y_sd);
        prob * normal_pdf(x, x_mean, x_sd)
    };
    let result = integrate(inner, x_lo, x_hi, quad_tolerance())?;
    Ok(result.value.clamp(0.0, 1.0))
}
