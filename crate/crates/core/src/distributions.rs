//! Binomial and Pascal / negative-binomial laws: exact evaluation and sampling.
//!
//! Probability masses are evaluated in log space through Stirling-corrected
//! log-gamma differences (Loader's saddle-point form), which stays accurate to
//! a few ulps for trial counts far beyond where factorials overflow.
//!
//! `Y = T - m` denotes the number of failures before the m-th success, so a
//! Pascal draw `T` has support `{m, m+1, ...}` and `Y` is NB(m, p).

use std::f64::consts::PI;
use std::sync::OnceLock;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use crate::error::{check_probability, domain, Result};

/// The simulation truth: trial count `N`, success probability `p` and the
/// Pascal success target `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n_true: u64,
    pub p: f64,
    pub m: u64,
}

impl ModelParams {
    pub fn new(n_true: u64, p: f64, m: u64) -> Result<Self> {
        let params = Self { n_true, p, m };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_true < 1 {
            return Err(domain("N must be at least 1"));
        }
        if self.m < 1 {
            return Err(domain("m must be at least 1"));
        }
        check_probability(self.p)
    }

    pub fn q(&self) -> f64 {
        1.0 - self.p
    }

    pub(crate) fn n(&self) -> f64 {
        self.n_true as f64
    }

    pub(crate) fn mf(&self) -> f64 {
        self.m as f64
    }
}

// ---------------------------------------------------------------------------
// Saddle-point pieces
// ---------------------------------------------------------------------------

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

fn small_stirling_errors() -> &'static [f64; 16] {
    static TABLE: OnceLock<[f64; 16]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = [0.0; 16];
        let mut ln_fact = 0.0;
        for (n, slot) in table.iter_mut().enumerate().skip(1) {
            let nf = n as f64;
            ln_fact += nf.ln();
            *slot = ln_fact - (nf + 0.5) * nf.ln() + nf - LN_SQRT_2PI;
        }
        table
    })
}

/// ln(n!) - [(n + 1/2) ln n - n + ln √(2π)] for integer-valued `n ≥ 1`.
fn stirling_error(n: f64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if n <= 15.0 {
        return small_stirling_errors()[n as usize];
    }
    let nn = n * n;
    if n > 500.0 {
        (S0 - S1 / nn) / n
    } else if n > 80.0 {
        (S0 - (S1 - S2 / nn) / nn) / n
    } else if n > 35.0 {
        (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / n
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / n
    }
}

/// Deviance term x ln(x/μ) + μ - x, with a series near x = μ.
fn deviance(x: f64, mu: f64) -> f64 {
    if (x - mu).abs() < 0.1 * (x + mu) {
        let mut v = (x - mu) / (x + mu);
        let mut s = (x - mu) * v;
        if s.abs() < f64::MIN_POSITIVE {
            return s;
        }
        let mut ej = 2.0 * x * v;
        v *= v;
        for j in 1..1000 {
            ej *= v;
            let next = s + ej / (2 * j + 1) as f64;
            if next == s {
                return next;
            }
            s = next;
        }
        s
    } else {
        x * (x / mu).ln() + mu - x
    }
}

/// b(x; n, p) for integer-valued `x`, `n`; `q` is passed as `1 - p`.
pub(crate) fn binom_mass(x: f64, n: f64, p: f64, q: f64) -> f64 {
    if x < 0.0 || x > n {
        return 0.0;
    }
    if x == 0.0 {
        if n == 0.0 {
            return 1.0;
        }
        let lc = if p < 0.1 {
            -deviance(n, n * q) - n * p
        } else {
            n * q.ln()
        };
        return lc.exp();
    }
    if x == n {
        let lc = if q < 0.1 {
            -deviance(n, n * p) - n * q
        } else {
            n * p.ln()
        };
        return lc.exp();
    }
    let lc = stirling_error(n)
        - stirling_error(x)
        - stirling_error(n - x)
        - deviance(x, n * p)
        - deviance(n - x, n * q);
    let lf = (2.0 * PI).ln() + x.ln() + (-x / n).ln_1p();
    (lc - 0.5 * lf).exp()
}

/// P(Y = y) for Y ~ NB(m, p), via m/(m+y) · b(m; m+y, p).
pub(crate) fn negbin_mass(y: f64, m: f64, p: f64, q: f64) -> f64 {
    if y < 0.0 {
        return 0.0;
    }
    m / (m + y) * binom_mass(m, m + y, p, q)
}

// ---------------------------------------------------------------------------
// Public evaluation API
// ---------------------------------------------------------------------------

/// Binomial probability mass b(j; n, p).
pub fn binom_pmf(j: u64, n: u64, p: f64) -> Result<f64> {
    check_probability(p)?;
    if j > n {
        return Err(domain(format!("binomial support is 0..={n}, got j = {j}")));
    }
    Ok(binom_mass(j as f64, n as f64, p, 1.0 - p))
}

/// Binomial distribution function B(j; n, p) = Σ_{i ≤ j} b(i; n, p).
pub fn binom_cdf(j: u64, n: u64, p: f64) -> Result<f64> {
    check_probability(p)?;
    if j > n {
        return Err(domain(format!("binomial support is 0..={n}, got j = {j}")));
    }
    if j == n {
        return Ok(1.0);
    }
    let (nf, q) = (n as f64, 1.0 - p);
    let sum: f64 = (0..=j).map(|i| binom_mass(i as f64, nf, p, q)).sum();
    Ok(sum.min(1.0))
}

fn check_pascal(m: u64, p: f64) -> Result<()> {
    if m < 1 {
        return Err(domain("Pascal target m must be at least 1"));
    }
    check_probability(p)
}

/// P(Y = y) for the NB(m, p) count of failures before the m-th success.
pub fn negbin_pmf(y: u64, m: u64, p: f64) -> Result<f64> {
    check_pascal(m, p)?;
    Ok(negbin_mass(y as f64, m as f64, p, 1.0 - p))
}

/// P(T = t) for T ~ Pasc(m, p), the trial count to the m-th success.
pub fn pascal_pmf(t: u64, m: u64, p: f64) -> Result<f64> {
    check_pascal(m, p)?;
    if t < m {
        return Ok(0.0);
    }
    negbin_pmf(t - m, m, p)
}

/// Running terms are dropped once they fall below this fraction of the sum...
const TAIL_RELATIVE_STOP: f64 = 1e-16;
/// ...and the geometric bound on everything not yet summed is below this.
const TAIL_REMAINDER_BOUND: f64 = 1e-14;

/// Σ_{k ≥ start} P(Y = k), summed upward with the pmf ratio
/// r_k = (k + m) q / (k + 1). Once r_k < 1 the ratios keep decreasing, so the
/// unsummed remainder after term t is at most t·r/(1 - r).
fn upper_tail_sum(start: f64, m: f64, p: f64, q: f64) -> f64 {
    let mut k = start;
    let mut term = negbin_mass(k, m, p, q);
    let mut sum = 0.0;
    loop {
        sum += term;
        let ratio = (k + m) * q / (k + 1.0);
        term *= ratio;
        k += 1.0;
        // A subnormal term times a ratio near 1 can round back to itself.
        if term == 0.0 || (ratio < 1.0 && term < f64::MIN_POSITIVE) {
            return sum + term;
        }
        if ratio < 1.0
            && term < TAIL_RELATIVE_STOP * sum
            && term / (1.0 - ratio) < TAIL_REMAINDER_BOUND
        {
            return sum + term;
        }
    }
}

/// Σ_{0 ≤ k ≤ end} P(Y = k), summed downward with the ratio
/// k / ((k - 1 + m) q); the same geometric bound applies once that is below 1.
fn lower_sum(end: f64, m: f64, p: f64, q: f64) -> f64 {
    let mut k = end;
    let mut term = negbin_mass(k, m, p, q);
    let mut sum = 0.0;
    loop {
        sum += term;
        if k == 0.0 {
            return sum;
        }
        let ratio = k / ((k - 1.0 + m) * q);
        term *= ratio;
        k -= 1.0;
        // A subnormal term times a ratio near 1 can round back to itself.
        if term == 0.0 || (ratio < 1.0 && term < f64::MIN_POSITIVE) {
            return sum + term;
        }
        if ratio < 1.0
            && term < TAIL_RELATIVE_STOP * sum
            && term / (1.0 - ratio) < TAIL_REMAINDER_BOUND
        {
            return sum + term;
        }
    }
}

/// P(Y > y) = P(Y ≥ ⌊y⌋ + 1) for Y ~ NB(m, p); equals 1 for y < 0.
///
/// Thresholds at or below the mean are evaluated as the complement of the
/// finite lower sum, the rest by summing the upper tail directly. Truncation
/// stops only when the next term is below 1e-16 of the running sum and the
/// geometric remainder bound is below 1e-14.
pub fn negbin_tail(y: f64, m: u64, p: f64) -> Result<f64> {
    check_pascal(m, p)?;
    if y.is_nan() {
        return Err(domain("tail threshold is NaN"));
    }
    Ok(negbin_tail_unchecked(y, m as f64, p, 1.0 - p))
}

/// [`negbin_tail`] without argument validation; `y` must not be NaN.
pub(crate) fn negbin_tail_unchecked(y: f64, m: f64, p: f64, q: f64) -> f64 {
    if y < 0.0 {
        return 1.0;
    }
    let first = y.floor() + 1.0;
    if !first.is_finite() {
        return 0.0;
    }
    if first <= m * q / p {
        (1.0 - lower_sum(first - 1.0, m, p, q)).clamp(0.0, 1.0)
    } else {
        upper_tail_sum(first, m, p, q).min(1.0)
    }
}

/// Same quantity as [`negbin_tail`] through the identity
/// P(Y ≥ j) = I_q(j, m) with the regularized incomplete beta function.
pub fn negbin_tail_beta(y: f64, m: u64, p: f64) -> Result<f64> {
    check_pascal(m, p)?;
    if y.is_nan() {
        return Err(domain("tail threshold is NaN"));
    }
    if y < 0.0 {
        return Ok(1.0);
    }
    let first = y.floor() + 1.0;
    Ok(beta_reg(first, m as f64, 1.0 - p))
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

/// B(n, p) sampler.
#[derive(Debug, Clone, Copy)]
pub struct BinomialSampler {
    inner: Binomial,
}

impl BinomialSampler {
    pub fn new(n: u64, p: f64) -> Result<Self> {
        check_probability(p)?;
        let inner = Binomial::new(n, p).map_err(|e| domain(e.to_string()))?;
        Ok(Self { inner })
    }
}

impl Distribution<u64> for BinomialSampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        self.inner.sample(rng)
    }
}

/// Pasc(m, p) sampler: the sum of `m` geometric trial counts, each drawn by
/// inverting its distribution function, G = 1 + ⌊ln U / ln q⌋ with U ∈ (0, 1].
#[derive(Debug, Clone, Copy)]
pub struct PascalSampler {
    m: u64,
    ln_q: f64,
}

impl PascalSampler {
    pub fn new(m: u64, p: f64) -> Result<Self> {
        check_pascal(m, p)?;
        Ok(Self {
            m,
            ln_q: (-p).ln_1p(),
        })
    }

    pub fn m(&self) -> u64 {
        self.m
    }
}

impl Distribution<u64> for PascalSampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        (0..self.m)
            .map(|_| {
                let u = 1.0 - rng.random::<f64>();
                1 + (u.ln() / self.ln_q).floor() as u64
            })
            .sum()
    }
}

pub fn sample_binomial<R: Rng + ?Sized>(rng: &mut R, n: u64, p: f64) -> Result<u64> {
    Ok(BinomialSampler::new(n, p)?.sample(rng))
}

pub fn sample_pascal<R: Rng + ?Sized>(rng: &mut R, m: u64, p: f64) -> Result<u64> {
    Ok(PascalSampler::new(m, p)?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngSeed;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn stirling_table_matches_series_at_the_seam() {
        // Just past the table the closed form and the series agree.
        let nf: f64 = 16.0;
        let ln_fact: f64 = (1..=16).map(|i| (i as f64).ln()).sum();
        let direct = ln_fact - (nf + 0.5) * nf.ln() + nf - LN_SQRT_2PI;
        // The direct form loses a few ulps of ln 16! to cancellation.
        assert!((direct - stirling_error(16.0)).abs() < 1e-13);
    }

    #[test]
    fn binom_pmf_trivial_values() {
        assert!((binom_pmf(0, 4, 0.5).unwrap() - 0.0625).abs() < 1e-16);
        assert!((binom_pmf(1, 1, 0.3).unwrap() - 0.3).abs() < 1e-16);
        assert!((binom_pmf(4, 4, 0.5).unwrap() - 0.0625).abs() < 1e-16);
    }

    #[test]
    fn binom_pmf_against_ratio_recurrence() {
        // b(0) = q^n, then b(j+1) = b(j) (n - j)/(j + 1) p/q.
        let (n, p) = (300u64, 0.4f64);
        let q = 1.0 - p;
        let mut b = q.powi(n as i32);
        for j in 0..=n {
            let got = binom_pmf(j, n, p).unwrap();
            if (60..=180).contains(&j) {
                assert!(close(got, b, 1e-12), "j={j}: {got} vs {b}");
            }
            b *= (n - j) as f64 / (j + 1) as f64 * p / q;
        }
    }

    #[test]
    fn binom_pmf_domain_errors() {
        assert!(binom_pmf(5, 4, 0.5).is_err());
        assert!(binom_pmf(1, 4, 0.0).is_err());
        assert!(binom_pmf(1, 4, 1.0).is_err());
        assert!(binom_pmf(1, 4, f64::NAN).is_err());
    }

    #[test]
    fn binom_cdf_values() {
        assert_eq!(binom_cdf(7, 7, 0.3).unwrap(), 1.0);
        assert!((binom_cdf(0, 5, 0.2).unwrap() - 0.32768).abs() < 1e-15);
        let mut acc = 0.0;
        let (n, p) = (300u64, 0.4);
        let q: f64 = 1.0 - p;
        let mut b = q.powi(n as i32);
        for j in 0..=150 {
            acc += b;
            b *= (n - j) as f64 / (j + 1) as f64 * p / q;
        }
        assert!((binom_cdf(150, n, p).unwrap() - acc).abs() < 1e-12);
        assert!(binom_cdf(6, 5, 0.2).is_err());
    }

    #[test]
    fn negbin_pmf_small_cases() {
        // Y=0: p^m; Y=1: m p^m q.
        assert!((negbin_pmf(0, 3, 0.5).unwrap() - 0.125).abs() < 1e-16);
        assert!((negbin_pmf(1, 3, 0.5).unwrap() - 3.0 * 0.0625).abs() < 1e-16);
        assert!((pascal_pmf(4, 3, 0.5).unwrap() - 3.0 * 0.0625).abs() < 1e-16);
        assert_eq!(pascal_pmf(2, 3, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn negbin_tail_trivial_values() {
        assert_eq!(negbin_tail(-1.0, 10, 0.4).unwrap(), 1.0);
        assert!((negbin_tail(0.0, 3, 0.5).unwrap() - 0.875).abs() < 1e-15);
        assert!((negbin_tail(0.7, 3, 0.5).unwrap() - 0.875).abs() < 1e-15);
        assert_eq!(negbin_tail(1e300, 3, 0.5).unwrap(), 0.0);
        assert!(negbin_tail(1.0, 0, 0.5).is_err());
        assert!(negbin_tail(f64::NAN, 2, 0.5).is_err());
    }

    #[test]
    fn negbin_tail_against_bruteforce_and_beta() {
        // Oracle: 1 - Σ_{y ≤ 15} C(y+m-1, y) p^m q^y with the coefficient
        // built by running product.
        let (m, p) = (10u64, 0.4f64);
        let q = 1.0 - p;
        let mut coef = 1.0;
        let mut acc = 0.0;
        for y in 0..=15u64 {
            if y > 0 {
                coef *= (y + m - 1) as f64 / y as f64;
            }
            acc += coef * p.powi(m as i32) * q.powi(y as i32);
        }
        let want = 1.0 - acc;
        assert!((negbin_tail(15.0, m, p).unwrap() - want).abs() < 1e-10);
        assert!((negbin_tail_beta(15.0, m, p).unwrap() - want).abs() < 1e-10);
    }

    #[test]
    fn pascal_sampler_support_and_near_certain_success() {
        let mut rng = RngSeed::new(11, 0).rng();
        let s = PascalSampler::new(5, 1.0 - 1e-12).unwrap();
        for _ in 0..1000 {
            assert_eq!(s.sample(&mut rng), 5);
        }
        let s = PascalSampler::new(3, 0.2).unwrap();
        for _ in 0..10_000 {
            assert!(s.sample(&mut rng) >= 3);
        }
    }

    #[test]
    fn binomial_near_certain_success() {
        let mut rng = RngSeed::new(5, 2).rng();
        for _ in 0..1000 {
            assert_eq!(sample_binomial(&mut rng, 1, 1.0 - 1e-12).unwrap(), 1);
        }
    }

    #[test]
    fn sampler_domain_errors() {
        let mut rng = RngSeed::new(1, 0).rng();
        assert!(sample_pascal(&mut rng, 0, 0.5).is_err());
        assert!(sample_pascal(&mut rng, 3, 1.0).is_err());
        assert!(sample_binomial(&mut rng, 3, 0.0).is_err());
    }
}
