//! Exact law of the single-pair estimator N̂ = X·T/m.
//!
//! With X ~ B(N, p) independent of T ~ Pasc(m, p),
//!
//! ```text
//! P(N̂ > ξ) = Σ_{x=1}^{N} b(x; N, p) · P(Y > m(ξ/x - 1)),   Y = T - m ~ NB(m, p)
//! ```
//!
//! and the raw moments factor as E(N̂^r) = E(X^r) E(T^r) / m^r.

use serde::{Deserialize, Serialize};

use crate::distributions::{binom_mass, negbin_tail_unchecked, ModelParams};
use crate::error::{domain, Result};

/// Closed-form moments of N̂.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NhatMoments {
    pub mean: f64,
    pub second_moment: f64,
    pub third_moment: f64,
    pub variance: f64,
    pub std: f64,
    pub skewness: f64,
}

/// P(N̂ > ξ) for real ξ ≥ 0.
///
/// The inner threshold is formed as `m·ξ/x - m`. Whenever `m·ξ` is an integer
/// (every integer ξ, and every value N̂ can take) the division is exact or the
/// true quotient is at least 1/x away from an integer, so the floor taken
/// inside the tail is never disturbed by rounding.
pub fn nhat_survival(xi: f64, params: &ModelParams) -> Result<f64> {
    params.validate()?;
    if xi.is_nan() || xi < 0.0 {
        return Err(domain(format!("survival argument must be >= 0, got {xi}")));
    }
    Ok(survival_unchecked(xi, params))
}

fn survival_unchecked(xi: f64, params: &ModelParams) -> f64 {
    let (n, p, q, m) = (params.n(), params.p, params.q(), params.mf());
    let scaled = m * xi;
    let mut total = 0.0;
    for x in 1..=params.n_true {
        let xf = x as f64;
        let weight = binom_mass(xf, n, p, q);
        if weight == 0.0 {
            continue;
        }
        total += weight * negbin_tail_unchecked(scaled / xf - m, m, p, q);
    }
    total.min(1.0)
}

/// P(n < N̂ ≤ n + 1).
pub fn nhat_interval_prob(n: u64, params: &ModelParams) -> Result<f64> {
    params.validate()?;
    let lower = survival_unchecked(n as f64, params);
    let upper = survival_unchecked(n as f64 + 1.0, params);
    Ok((lower - upper).max(0.0))
}

/// Integer part of the median of N̂.
///
/// The median is the smallest attainable value v with P(N̂ ≤ v) ≥ 1/2. Let n₁
/// be the smallest integer with P(N̂ > n₁) ≤ 1/2, so v ∈ (n₁ - 1, n₁]. Values
/// of N̂ are multiples of 1/m, so v = n₁ exactly when the survival function is
/// still above 1/2 at n₁ - 1/(2m); otherwise ⌊v⌋ = n₁ - 1.
pub fn nhat_median(params: &ModelParams) -> Result<u64> {
    params.validate()?;
    let above_half = |v: f64| survival_unchecked(v, params) > 0.5;
    if !above_half(0.0) {
        return Ok(0);
    }
    let (mut lo, mut hi) = (0u64, params.n_true.max(1) * 2);
    while above_half(hi as f64) {
        lo = hi;
        hi *= 2;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if above_half(mid as f64) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if above_half(hi as f64 - 0.5 / params.mf()) {
        Ok(hi)
    } else {
        Ok(hi - 1)
    }
}

/// Mean, raw second and third moments, variance, standard deviation and
/// skewness of N̂ from their closed forms.
pub fn nhat_moments(params: &ModelParams) -> Result<NhatMoments> {
    params.validate()?;
    let (n, p, q, m) = (params.n(), params.p, params.q(), params.mf());

    let second_moment = n * (n * p - p + 1.0) * (m - p + 1.0) / (m * p);
    let binomial_part = n * (n - 1.0) * (n - 2.0) * p.powi(3) + 3.0 * n * (n - 1.0) * p * p + n * p;
    let pascal_part = m * m - 3.0 * m * p + 3.0 * m + p * p - 3.0 * p + 2.0;
    let third_moment = binomial_part * pascal_part / (m * m * p.powi(3));

    let variance = n * q * (n * p + q + m) / (p * m);
    let skewness = (third_moment - n.powi(3) - 3.0 * n * variance) / variance.powf(1.5);

    Ok(NhatMoments {
        mean: n,
        second_moment,
        third_moment,
        variance,
        std: variance.sqrt(),
        skewness,
    })
}

/// E(N̂³) assembled from the cumulants of X and T instead of the expanded
/// polynomial: E(Z³) = κ₃ + 3κ₂κ₁ + κ₁³ for each factor.
pub fn third_moment_from_cumulants(params: &ModelParams) -> f64 {
    let (n, p, q, m) = (params.n(), params.p, params.q(), params.mf());
    let raw3 = |k1: f64, k2: f64, k3: f64| k3 + 3.0 * k2 * k1 + k1.powi(3);
    // B(N, p): N p, N p q, N p q (1 - 2p).
    let x3 = raw3(n * p, n * p * q, n * p * q * (1.0 - 2.0 * p));
    // Sum of m geometrics on {1, 2, ...}: m/p, m q/p², m q (1 + q)/p³.
    let t3 = raw3(m / p, m * q / (p * p), m * q * (1.0 + q) / p.powi(3));
    x3 * t3 / m.powi(3)
}
