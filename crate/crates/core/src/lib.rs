//! Unbiased estimation of the binomial trial count `N` when the success
//! probability `p` is unknown.
//!
//! A binomial count X ~ B(N, p) is paired with an independent Pascal waiting
//! time T ~ Pasc(m, p) sharing the same `p`; since E(X) = Np and E(T) = m/p,
//! N̂ = XT/m is unbiased for N. The crate provides
//!
//! - exact pmfs, tails and samplers for both laws ([`distributions`]),
//! - the exact survival function, median and moments of N̂ ([`nhat_dist`]),
//! - the mean-of-products and product-of-means estimators with their
//!   variances and CLT intervals ([`estimators`]),
//! - fixed-precision sample sizes and their asymptotics ([`design`]),
//! - two-stage and sequential procedures with a seeded replication harness
//!   ([`procedures`]),
//! - the `nhat` command-line front end ([`cli`]).
//!
//! ```
//! use nhat::{nhat_single, k_oracle, ModelParams, PrecisionSpec};
//!
//! assert_eq!(nhat_single(3580, 25, 10).unwrap(), 8950.0);
//!
//! let params = ModelParams::new(500, 0.6, 10).unwrap();
//! let size = k_oracle(&params, &PrecisionSpec::new(0.01).unwrap()).unwrap();
//! assert_eq!(size.k_value, 1654);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod design;
pub mod distributions;
pub mod error;
pub mod estimators;
pub mod nhat_dist;
pub mod normal;
pub mod procedures;
pub mod quadrature;
pub mod rng;

pub use design::{
    coverage_two_stage, expected_k_two_stage, k_oracle, k_two_stage, KtsMoments, Multiplier,
    PrecisionSpec, SampleSizeResult,
};
pub use distributions::{
    binom_cdf, binom_pmf, negbin_pmf, negbin_tail, negbin_tail_beta, pascal_pmf, sample_binomial,
    sample_pascal, ModelParams,
};
pub use error::{Error, Result};
pub use estimators::{
    clt_confidence_interval, conditional_coverage, estimate_mean_of_products,
    estimate_product_of_means, nhat_single, relative_efficiency, sample_variance_s2,
    var_mean_of_products, var_product_of_means, EstimateReport, EstimatorKind, PairedSample,
};
pub use nhat_dist::{nhat_interval_prob, nhat_median, nhat_moments, nhat_survival, NhatMoments};
pub use procedures::{
    replicate, run_sequential, run_two_stage, Procedure, ProcedureConfig, ReplicationSummary,
    RunResult, TwoStageMode,
};
pub use rng::RngSeed;
