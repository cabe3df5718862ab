//! Point estimators of N and p from paired binomial/Pascal samples, their
//! variances, and CLT intervals with coverage evaluation.

use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::distributions::{BinomialSampler, ModelParams, PascalSampler};
use crate::error::{domain, Result};
use crate::normal::{std_normal_cdf, two_sided_z};
use crate::rng::RngSeed;

/// Binomial counts `xs` and Pascal waiting times `ts`, all with target `m`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairedSample {
    xs: Vec<u64>,
    ts: Vec<u64>,
    m: u64,
}

impl PairedSample {
    pub fn new(xs: Vec<u64>, ts: Vec<u64>, m: u64) -> Result<Self> {
        if m < 1 {
            return Err(domain("m must be at least 1"));
        }
        if xs.is_empty() || ts.is_empty() {
            return Err(domain("both samples need at least one value"));
        }
        if let Some(t) = ts.iter().find(|&&t| t < m) {
            return Err(domain(format!("Pascal waiting time {t} is below m = {m}")));
        }
        Ok(Self { xs, ts, m })
    }

    pub fn xs(&self) -> &[u64] {
        &self.xs
    }

    pub fn ts(&self) -> &[u64] {
        &self.ts
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn is_paired(&self) -> bool {
        self.xs.len() == self.ts.len()
    }

    pub fn mean_x(&self) -> f64 {
        mean_u64(&self.xs)
    }

    pub fn mean_t(&self) -> f64 {
        mean_u64(&self.ts)
    }

    /// p̂ = m / T̄; never above 1 because every T ≥ m.
    pub fn p_hat(&self) -> f64 {
        self.m as f64 / self.mean_t()
    }

    /// The single-pair estimates X_i·T_i/m.
    pub fn pair_estimates(&self) -> Result<Vec<f64>> {
        self.require_paired()?;
        let m = self.m as f64;
        Ok(self
            .xs
            .iter()
            .zip(&self.ts)
            .map(|(&x, &t)| x as f64 * t as f64 / m)
            .collect())
    }

    fn require_paired(&self) -> Result<()> {
        if self.is_paired() {
            Ok(())
        } else {
            Err(domain(format!(
                "paired estimator needs equal lengths, got {} and {}",
                self.xs.len(),
                self.ts.len()
            )))
        }
    }
}

fn mean_u64(values: &[u64]) -> f64 {
    values.iter().map(|&v| v as f64).sum::<f64>() / values.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    MeanOfProducts,
    ProductOfMeans,
}

impl EstimatorKind {
    pub fn label(self) -> &'static str {
        match self {
            EstimatorKind::MeanOfProducts => "mean-of-products",
            EstimatorKind::ProductOfMeans => "product-of-means",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub n_hat: f64,
    pub p_hat: f64,
    pub k_final: u64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub method: EstimatorKind,
}

impl EstimateReport {
    /// Point estimate with a CLT interval at level 1 - α.
    ///
    /// The mean-of-products interval uses S² of the pair estimates; the
    /// product-of-means interval plugs N̂ and p̂ into its exact variance. A
    /// single pair gives a point interval.
    pub fn from_sample(sample: &PairedSample, method: EstimatorKind, alpha: f64) -> Result<Self> {
        let p_hat = sample.p_hat();
        let (n_hat, k, variance) = match method {
            EstimatorKind::MeanOfProducts => {
                let nhats = sample.pair_estimates()?;
                let k = nhats.len();
                let center = nhats.iter().sum::<f64>() / k as f64;
                let s2 = if k >= 2 { sample_variance_s2(&nhats)? } else { 0.0 };
                (center, k, s2 / k as f64)
            }
            EstimatorKind::ProductOfMeans => {
                let n_hat = estimate_product_of_means(sample);
                let (k1, k2) = (sample.xs.len() as f64, sample.ts.len() as f64);
                let (q_hat, m) = (1.0 - p_hat, sample.m as f64);
                let var = if p_hat < 1.0 {
                    n_hat * q_hat / (m * p_hat)
                        * (n_hat * p_hat / k2 + m / k1 + q_hat / (k1 * k2))
                } else {
                    0.0
                };
                (n_hat, sample.xs.len().max(sample.ts.len()), var)
            }
        };
        let half = two_sided_z(alpha)? * variance.sqrt();
        Ok(Self {
            n_hat,
            p_hat,
            k_final: k as u64,
            ci_low: n_hat - half,
            ci_high: n_hat + half,
            method,
        })
    }
}

/// N̂ = x·t/m for one binomial count and one Pascal waiting time.
pub fn nhat_single(x: u64, t: u64, m: u64) -> Result<f64> {
    if m < 1 {
        return Err(domain("m must be at least 1"));
    }
    if t < m {
        return Err(domain(format!("Pascal waiting time {t} is below m = {m}")));
    }
    Ok(x as f64 * t as f64 / m as f64)
}

/// (1/k) Σ X_i T_i / m over equal-length samples.
pub fn estimate_mean_of_products(sample: &PairedSample) -> Result<f64> {
    let nhats = sample.pair_estimates()?;
    Ok(nhats.iter().sum::<f64>() / nhats.len() as f64)
}

/// X̄ · T̄ / m; the two samples may differ in length.
pub fn estimate_product_of_means(sample: &PairedSample) -> f64 {
    sample.mean_x() * sample.mean_t() / sample.m as f64
}

fn check_k(k: u64, name: &str) -> Result<f64> {
    if k == 0 {
        Err(domain(format!("{name} must be at least 1")))
    } else {
        Ok(k as f64)
    }
}

/// Var of the mean of k pair estimates: (Nq/(kmp))(Np + m + q).
pub fn var_mean_of_products(params: &ModelParams, k: u64) -> Result<f64> {
    params.validate()?;
    let k = check_k(k, "k")?;
    let (n, p, q, m) = (params.n(), params.p, params.q(), params.mf());
    Ok(n * q / (k * m * p) * (n * p + m + q))
}

/// Var of X̄_{k1}·T̄_{k2}/m: (Nq/(mp))(Np/k2 + m/k1 + q/(k1 k2)).
pub fn var_product_of_means(params: &ModelParams, k1: u64, k2: u64) -> Result<f64> {
    params.validate()?;
    let k1 = check_k(k1, "k1")?;
    let k2 = check_k(k2, "k2")?;
    let (n, p, q, m) = (params.n(), params.p, params.q(), params.mf());
    Ok(n * q / (m * p) * (n * p / k2 + m / k1 + q / (k1 * k2)))
}

/// Variance ratio of the product-of-means to the mean-of-products estimator
/// at k1 = k2 = k: (Np + m + q/k)/(Np + m + q).
pub fn relative_efficiency(params: &ModelParams, k: u64) -> Result<f64> {
    params.validate()?;
    let k = check_k(k, "k")?;
    let (n, p, q, m) = (params.n(), params.p, params.q(), params.mf());
    Ok((n * p + m + q / k) / (n * p + m + q))
}

/// Unbiased sample variance with divisor k - 1.
pub fn sample_variance_s2(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(domain("sample variance needs at least two values"));
    }
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    Ok(values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0))
}

/// center ± z_{1-α/2} √(s2/k).
pub fn clt_confidence_interval(center: f64, s2: f64, k: u64, alpha: f64) -> Result<(f64, f64)> {
    let k = check_k(k, "k")?;
    if !(s2 >= 0.0) {
        return Err(domain(format!("variance estimate must be >= 0, got {s2}")));
    }
    let half = two_sided_z(alpha)? * (s2 / k).sqrt();
    Ok((center - half, center + half))
}

/// 2Φ(z_{1-α/2}·S/D) - 1 with S = √s2 and D = √var_true: the approximate
/// coverage of the CLT interval given an S² independent of its center.
pub fn conditional_coverage(s2: f64, var_true: f64, alpha: f64) -> Result<f64> {
    if !(s2 >= 0.0) {
        return Err(domain(format!("variance estimate must be >= 0, got {s2}")));
    }
    if !(var_true > 0.0) {
        return Err(domain(format!("true variance must be > 0, got {var_true}")));
    }
    let z = two_sided_z(alpha)?;
    Ok(2.0 * std_normal_cdf(z * (s2 / var_true).sqrt()) - 1.0)
}

/// Monte Carlo evaluation of the CLT interval's coverage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageExperiment {
    pub params: ModelParams,
    pub k: u64,
    pub alpha: f64,
    pub replicas: u64,
    pub seed: u64,
    /// Draw 2k pairs per replica: the first k give the center, the other k
    /// give an independent S². When false, one sample of k serves both.
    pub split_sample: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageEstimate {
    /// Fraction of replicas whose interval contains N.
    pub empirical: f64,
    /// Average of 2Φ(z S/D) - 1 over the replicas' S².
    pub mean_conditional: f64,
    pub replicas: u64,
}

impl CoverageExperiment {
    pub fn run(&self) -> Result<CoverageEstimate> {
        self.params.validate()?;
        if self.k < 2 {
            return Err(domain("coverage experiment needs k >= 2"));
        }
        if self.replicas == 0 {
            return Err(domain("replicas must be at least 1"));
        }
        let binomial = BinomialSampler::new(self.params.n_true, self.params.p)?;
        let pascal = PascalSampler::new(self.params.m, self.params.p)?;
        let var_true = var_mean_of_products(&self.params, 1)?;
        let m = self.params.mf();
        let truth = self.params.n();
        let k = self.k as usize;

        let mut hits = 0u64;
        let mut conditional = 0.0;
        let mut buf = Vec::with_capacity(2 * k);
        for replica in 0..self.replicas {
            let mut rng = RngSeed::new(self.seed, replica).rng();
            let draws = if self.split_sample { 2 * k } else { k };
            buf.clear();
            buf.extend((0..draws).map(|_| {
                let x = binomial.sample(&mut rng) as f64;
                let t = pascal.sample(&mut rng) as f64;
                x * t / m
            }));
            let center = buf[..k].iter().sum::<f64>() / k as f64;
            let s2 = if self.split_sample {
                sample_variance_s2(&buf[k..])?
            } else {
                sample_variance_s2(&buf[..k])?
            };
            let (lo, hi) = clt_confidence_interval(center, s2, self.k, self.alpha)?;
            if lo <= truth && truth <= hi {
                hits += 1;
            }
            conditional += conditional_coverage(s2, var_true, self.alpha)?;
        }
        let r = self.replicas as f64;
        Ok(CoverageEstimate {
            empirical: hits as f64 / r,
            mean_conditional: conditional / r,
            replicas: self.replicas,
        })
    }
}
