//! Two-stage and sequential sampling procedures and the replication harness.
//!
//! Both procedures start from a pilot of K₁ pairs (X, T) and use the plug-in
//! size K_TS(k) from [`crate::design::k_two_stage`].
//!
//! * Two-stage: if K₁ ≥ K_TS(K₁) the pilot is final; otherwise the sample is
//!   brought to K_TS(K₁) pairs, either by augmenting the pilot or, in
//!   [`TwoStageMode::Resample`], by drawing a fresh sample of that size.
//! * Sequential: pairs are added one at a time until the first k > K₁ with
//!   k > K_TS(k), or stop at the pilot if K₁ > K_TS(K₁). Estimates use all
//!   accumulated pairs.

use rand::Rng;
use rand_distr::Distribution;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design::{k_two_stage, PrecisionSpec};
use crate::distributions::{BinomialSampler, ModelParams, PascalSampler};
use crate::error::{domain, Error, Result};
use crate::rng::RngSeed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Procedure {
    TwoStage,
    Sequential,
}

impl Procedure {
    pub fn label(self) -> &'static str {
        match self {
            Procedure::TwoStage => "two-stage",
            Procedure::Sequential => "sequential",
        }
    }
}

/// How the two-stage procedure forms its final sample when K_TS(K₁) > K₁.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum TwoStageMode {
    /// Keep the pilot and draw K_TS - K₁ more pairs.
    #[default]
    Augment,
    /// Discard the pilot and draw a fresh sample of K_TS pairs.
    Resample,
}

pub const DEFAULT_MAX_K: u64 = 10_000_000;
pub const DEFAULT_MAX_PILOT_REDRAWS: u32 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProcedureConfig {
    pub params: ModelParams,
    pub k1: u64,
    pub precision: PrecisionSpec,
    pub procedure: Procedure,
    pub replicas: u64,
    pub seed: u64,
    pub two_stage_mode: TwoStageMode,
    /// Sequential runs still going at this k fail with
    /// [`Error::RunawayStoppingRule`].
    pub max_k: u64,
    pub max_pilot_redraws: u32,
}

impl ProcedureConfig {
    pub fn new(
        params: ModelParams,
        k1: u64,
        precision: PrecisionSpec,
        procedure: Procedure,
        replicas: u64,
        seed: u64,
    ) -> Result<Self> {
        let config = Self {
            params,
            k1,
            precision,
            procedure,
            replicas,
            seed,
            two_stage_mode: TwoStageMode::default(),
            max_k: DEFAULT_MAX_K,
            max_pilot_redraws: DEFAULT_MAX_PILOT_REDRAWS,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_two_stage_mode(mut self, mode: TwoStageMode) -> Self {
        self.two_stage_mode = mode;
        self
    }

    pub fn with_max_k(mut self, max_k: u64) -> Self {
        self.max_k = max_k;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.precision.validate()?;
        if self.k1 < 2 {
            return Err(domain(format!("pilot size must be at least 2, got {}", self.k1)));
        }
        if self.replicas < 1 {
            return Err(domain("replicas must be at least 1"));
        }
        if self.max_k < self.k1 {
            return Err(domain("max_k must not be below the pilot size"));
        }
        Ok(())
    }
}

/// Outcome of one run of a procedure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    /// Number of pairs behind the final estimates.
    pub k_final: u64,
    /// K_TS evaluated at the pilot means.
    pub k_pilot_requirement: u64,
    /// K_TS evaluated at the final running means (sequential), or the pilot
    /// requirement again (two-stage).
    pub k_final_requirement: u64,
    pub n_hat: f64,
    pub p_hat: f64,
    /// γ·N̂.
    pub half_width: f64,
    pub pilot_redraws: u32,
}

#[derive(Debug, Clone, Copy, Default)]
struct Sums {
    k: u64,
    x: u64,
    t: u64,
}

impl Sums {
    fn mean_x(&self) -> f64 {
        self.x as f64 / self.k as f64
    }

    fn mean_t(&self) -> f64 {
        self.t as f64 / self.k as f64
    }
}

struct PairDraws {
    binomial: BinomialSampler,
    pascal: PascalSampler,
}

impl PairDraws {
    fn new(params: &ModelParams) -> Result<Self> {
        Ok(Self {
            binomial: BinomialSampler::new(params.n_true, params.p)?,
            pascal: PascalSampler::new(params.m, params.p)?,
        })
    }

    fn add<R: Rng + ?Sized>(&self, sums: &mut Sums, count: u64, rng: &mut R) {
        for _ in 0..count {
            sums.x += self.binomial.sample(rng);
        }
        for _ in 0..count {
            sums.t += self.pascal.sample(rng);
        }
        sums.k += count;
    }

    /// Draws K₁ pairs, redrawing while every binomial count is zero.
    fn pilot<R: Rng + ?Sized>(&self, config: &ProcedureConfig, rng: &mut R) -> Result<(Sums, u32)> {
        let mut redraws = 0;
        loop {
            let mut sums = Sums::default();
            self.add(&mut sums, config.k1, rng);
            if sums.x > 0 {
                return Ok((sums, redraws));
            }
            if redraws >= config.max_pilot_redraws {
                return Err(Error::DegeneratePilot { redraws });
            }
            redraws += 1;
        }
    }
}

fn requirement(sums: &Sums, m: u64, gamma: f64) -> Result<u64> {
    k_two_stage(sums.mean_x(), sums.mean_t(), m, gamma)
}

fn finish(sums: &Sums, m: u64, gamma: f64, pilot_req: u64, final_req: u64, redraws: u32) -> RunResult {
    let t_bar = sums.mean_t();
    let n_hat = sums.mean_x() * t_bar / m as f64;
    RunResult {
        k_final: sums.k,
        k_pilot_requirement: pilot_req,
        k_final_requirement: final_req,
        n_hat,
        p_hat: m as f64 / t_bar,
        half_width: gamma * n_hat,
        pilot_redraws: redraws,
    }
}

pub fn run_two_stage<R: Rng + ?Sized>(config: &ProcedureConfig, rng: &mut R) -> Result<RunResult> {
    config.validate()?;
    let gamma = config.precision.effective_gamma()?;
    let m = config.params.m;
    let draws = PairDraws::new(&config.params)?;
    let (pilot, redraws) = draws.pilot(config, rng)?;
    let required = requirement(&pilot, m, gamma)?;
    let target = required.max(config.k1);

    let sums = if required <= config.k1 {
        pilot
    } else {
        match config.two_stage_mode {
            TwoStageMode::Augment => {
                let mut sums = pilot;
                draws.add(&mut sums, target - config.k1, rng);
                sums
            }
            TwoStageMode::Resample => {
                let mut sums = Sums::default();
                draws.add(&mut sums, target, rng);
                sums
            }
        }
    };
    Ok(finish(&sums, m, config.precision.gamma, required, required, redraws))
}

pub fn run_sequential<R: Rng + ?Sized>(config: &ProcedureConfig, rng: &mut R) -> Result<RunResult> {
    config.validate()?;
    let gamma = config.precision.effective_gamma()?;
    let m = config.params.m;
    let draws = PairDraws::new(&config.params)?;
    let (mut sums, redraws) = draws.pilot(config, rng)?;
    let pilot_req = requirement(&sums, m, gamma)?;
    let mut current = pilot_req;
    while sums.k <= current {
        if sums.k >= config.max_k {
            return Err(Error::RunawayStoppingRule { cap: config.max_k });
        }
        draws.add(&mut sums, 1, rng);
        current = requirement(&sums, m, gamma)?;
    }
    Ok(finish(&sums, m, config.precision.gamma, pilot_req, current, redraws))
}

pub fn run<R: Rng + ?Sized>(config: &ProcedureConfig, rng: &mut R) -> Result<RunResult> {
    match config.procedure {
        Procedure::TwoStage => run_two_stage(config, rng),
        Procedure::Sequential => run_sequential(config, rng),
    }
}

/// Aggregate over the replicas that completed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationSummary {
    pub replicas: u64,
    pub aborted: u64,
    pub mean_k: f64,
    /// Sample standard deviation (divisor R - 1); `None` for one replica.
    pub std_k: Option<f64>,
    pub q025_k: f64,
    pub q975_k: f64,
    pub mean_n_hat: f64,
    pub std_n_hat: Option<f64>,
    pub mean_p_hat: f64,
    pub mean_half_width: f64,
}

/// Nearest-rank quantile of sorted data: the value at rank ⌈level·n⌉.
pub fn nearest_rank_quantile(sorted: &[f64], level: f64) -> f64 {
    let n = sorted.len();
    let rank = ((level * n as f64).ceil() as usize).clamp(1, n);
    sorted[rank - 1]
}

fn mean_and_std(values: &[f64]) -> (f64, Option<f64>) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = (values.len() > 1)
        .then(|| (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt());
    (mean, std)
}

/// Runs every replica on its own stream (`stream_id` = replica index) and
/// reduces the results in replica order.
pub fn replicate_runs(config: &ProcedureConfig) -> Result<Vec<Result<RunResult>>> {
    config.validate()?;
    let base = RngSeed::new(config.seed, 0);
    Ok((0..config.replicas)
        .into_par_iter()
        .map(|replica| {
            let mut rng = base.with_stream(replica).rng();
            run(config, &mut rng)
        })
        .collect())
}

/// Summary statistics of K and the estimates over `config.replicas` runs.
/// Fails when more than 1% of replicas abort.
pub fn replicate(config: &ProcedureConfig) -> Result<ReplicationSummary> {
    summarize(config.replicas, &replicate_runs(config)?)
}

pub fn summarize(replicas: u64, runs: &[Result<RunResult>]) -> Result<ReplicationSummary> {
    let completed: Vec<&RunResult> = runs.iter().filter_map(|r| r.as_ref().ok()).collect();
    let aborted = runs.len() - completed.len();
    if aborted * 100 > runs.len() || completed.is_empty() {
        let first = runs
            .iter()
            .find_map(|r| r.as_ref().err())
            .map(ToString::to_string)
            .unwrap_or_default();
        return Err(Error::TooManyAborts {
            aborted,
            replicas: runs.len(),
            first,
        });
    }
    let mut ks: Vec<f64> = completed.iter().map(|r| r.k_final as f64).collect();
    let nhats: Vec<f64> = completed.iter().map(|r| r.n_hat).collect();
    let (mean_k, std_k) = mean_and_std(&ks);
    let (mean_n_hat, std_n_hat) = mean_and_std(&nhats);
    ks.sort_by(f64::total_cmp);
    let count = completed.len() as f64;
    Ok(ReplicationSummary {
        replicas,
        aborted: aborted as u64,
        mean_k,
        std_k,
        q025_k: nearest_rank_quantile(&ks, 0.025),
        q975_k: nearest_rank_quantile(&ks, 0.975),
        mean_n_hat,
        std_n_hat,
        mean_p_hat: completed.iter().map(|r| r.p_hat).sum::<f64>() / count,
        mean_half_width: completed.iter().map(|r| r.half_width).sum::<f64>() / count,
    })
}
