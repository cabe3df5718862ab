//! The `nhat` command-line interface.
//!
//! Every subcommand is a thin wrapper that validates flags, calls the library
//! and packs the results into [`OutputRecord`]s; no arithmetic happens here.

pub mod output;
pub mod presets;
pub mod samples;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::design::{
    coverage_two_stage, expected_k_two_stage, k_oracle, PrecisionSpec,
};
use crate::distributions::ModelParams;
use crate::error::Error;
use crate::estimators::{
    conditional_coverage, nhat_single, relative_efficiency, var_mean_of_products,
    CoverageExperiment, EstimateReport, EstimatorKind,
};
use crate::nhat_dist::{nhat_median, nhat_moments, nhat_survival};
use crate::procedures::{replicate_runs, summarize, Procedure, ProcedureConfig, TwoStageMode};

pub use output::{Format, OutputRecord};
use output::{float, opt_float, render};

#[derive(Debug, Parser)]
#[command(
    name = "nhat",
    version,
    about = "Unbiased estimation of the binomial N with unknown p from paired binomial and Pascal samples"
)]
pub struct Cli {
    /// Output format: aligned tables or one JSON record per line.
    #[arg(long, value_enum, default_value_t = Format::Table, global = true)]
    pub format: Format,

    /// Significant digits for floating-point values in table output.
    #[arg(long, default_value_t = 6, global = true)]
    pub precision: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact survival probabilities P(N̂ > n) and the median of N̂.
    Survival(SurvivalArgs),
    /// Closed-form moments, standard deviation and skewness of N̂.
    Moments(MomentsArgs),
    /// Variance ratio of the product-of-means to the mean-of-products estimator.
    Efficiency(EfficiencyArgs),
    /// Fixed-precision sample size, optionally with two-stage asymptotics.
    Design(DesignArgs),
    /// Replicate the two-stage or sequential procedure.
    Simulate(SimulateArgs),
    /// Estimate N and p from one pair or from a sample file.
    Estimate(EstimateArgs),
    /// Coverage of the CLT interval for the mean-of-products estimator.
    Coverage(CoverageArgs),
}

#[derive(Debug, Clone, Copy, Args)]
pub struct ParamArgs {
    /// Binomial trial count N.
    #[arg(long = "N")]
    pub n: Option<u64>,
    /// Success probability p.
    #[arg(long)]
    pub p: Option<f64>,
    /// Pascal success target m.
    #[arg(long)]
    pub m: Option<u64>,
}

impl ParamArgs {
    fn resolve(&self) -> Result<ModelParams, CliError> {
        let (Some(n), Some(p), Some(m)) = (self.n, self.p, self.m) else {
            return Err(CliError::Usage("--N, --p and --m are required".into()));
        };
        Ok(ModelParams::new(n, p, m)?)
    }
}

#[derive(Debug, Args)]
pub struct SurvivalArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Comma-separated survival arguments.
    #[arg(long, value_delimiter = ',')]
    pub xi: Vec<f64>,
    /// Grid start, used with --to and --step.
    #[arg(long)]
    pub from: Option<f64>,
    #[arg(long)]
    pub to: Option<f64>,
    #[arg(long)]
    pub step: Option<f64>,
    /// Also report the median of N̂.
    #[arg(long)]
    pub median: bool,
    /// Preset 1: N=300, p=0.4, m=10 at n = 100, 150, ..., 500, plus the median.
    #[arg(long)]
    pub table: Option<u8>,
}

#[derive(Debug, Args)]
pub struct MomentsArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Preset 2: N=500 with p in {0.6, 0.3} and m in {10, 20, 30, 40}.
    #[arg(long)]
    pub table: Option<u8>,
}

#[derive(Debug, Args)]
pub struct EfficiencyArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Comma-separated sample sizes k.
    #[arg(long, value_delimiter = ',')]
    pub k: Vec<u64>,
    /// Preset 3: N=500, p=0.6, m in {10, 50}, k in {10, 20, 50, 100, 1000}.
    #[arg(long)]
    pub table: Option<u8>,
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Proportional closeness γ in (0, 1).
    #[arg(long)]
    pub gamma: f64,
    /// Pilot size for the asymptotic moments of K_TS.
    #[arg(long, default_value_t = 100)]
    pub k1: u64,
    /// Report the asymptotic mean and std of K_TS(K₁) and the coverage of the
    /// proportional-closeness interval.
    #[arg(long)]
    pub expect: bool,
    /// Final size for the coverage; defaults to ⌊E K_TS⌋ + 1.
    #[arg(long)]
    pub k_ts: Option<u64>,
    /// Use z_{1-α/2} instead of 2 as the precision multiplier.
    #[arg(long)]
    pub z_multiplier: bool,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProcedureArg {
    TwoStage,
    Sequential,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, default_value_t = 100)]
    pub k1: u64,
    #[arg(long, default_value_t = 1000)]
    pub replicas: u64,
    /// Base seed; replica r uses stream r. Required with --table.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = ProcedureArg::Sequential)]
    pub procedure: ProcedureArg,
    /// Two-stage: draw a fresh final sample instead of augmenting the pilot.
    #[arg(long)]
    pub compat_resample: bool,
    /// Preset 4: two-stage (fresh resample) and sequential at N=500, p=0.6,
    /// m=10, K₁=100, γ=0.01. Preset 5: eight sequential configurations.
    /// 1000 replicas each.
    #[arg(long)]
    pub table: Option<u8>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Binomial count.
    #[arg(long)]
    pub x: Option<u64>,
    /// Pascal waiting time.
    #[arg(long)]
    pub t: Option<u64>,
    #[arg(long)]
    pub m: Option<u64>,
    /// Sample file: header `m=<int>`, then one `x t` pair per line.
    #[arg(long)]
    pub file: Option<PathBuf>,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
}

#[derive(Debug, Args)]
pub struct CoverageArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Evaluate 2Φ(z·S/D) - 1 at this S² instead of simulating.
    #[arg(long)]
    pub s2: Option<f64>,
    #[arg(long, default_value_t = 100)]
    pub k: u64,
    #[arg(long, default_value_t = 1000)]
    pub replicas: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Use one sample for both the center and S².
    #[arg(long)]
    pub no_split: bool,
}

#[derive(Debug)]
pub enum CliError {
    Lib(Error),
    Usage(String),
    Io(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Usage(msg) => write!(f, "usage: {msg}"),
            CliError::Io(msg) => write!(f, "{msg}"),
        }
    }
}

pub mod exit_codes {
    pub const IO: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const DOMAIN: u8 = 3;
    pub const DEGENERATE_PILOT: u8 = 4;
    pub const TOLERANCE: u8 = 5;
    pub const RUNAWAY: u8 = 6;
    pub const ABORTS: u8 = 7;
    pub const PARSE: u8 = 8;
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use exit_codes::*;
        match self {
            CliError::Io(_) => IO,
            CliError::Usage(_) => USAGE,
            CliError::Lib(e) => match e {
                Error::Domain(_) => DOMAIN,
                Error::DegeneratePilot { .. } => DEGENERATE_PILOT,
                Error::ToleranceNotMet { .. } => TOLERANCE,
                Error::RunawayStoppingRule { .. } => RUNAWAY,
                Error::TooManyAborts { .. } => ABORTS,
                Error::Parse { .. } => PARSE,
            },
        }
    }
}

fn params_record(command: &str, p: &ModelParams) -> OutputRecord {
    OutputRecord::new(command)
        .input("N", p.n_true)
        .input("p", p.p)
        .input("m", p.m)
}

fn expect_table(table: Option<u8>, allowed: &[u8], command: &str) -> Result<Option<u8>, CliError> {
    match table {
        Some(t) if !allowed.contains(&t) => Err(CliError::Usage(format!(
            "{command} supports --table {}",
            allowed.iter().map(u8::to_string).collect::<Vec<_>>().join(" or ")
        ))),
        other => Ok(other),
    }
}

pub fn cmd_survival(args: &SurvivalArgs) -> Result<Vec<OutputRecord>, CliError> {
    let (params, grid, with_median) = if expect_table(args.table, &[1], "survival")?.is_some() {
        let (n, p, m) = presets::SURVIVAL;
        let grid = presets::SURVIVAL_GRID.iter().map(|&v| v as f64).collect();
        (ModelParams::new(n, p, m)?, grid, true)
    } else {
        let params = args.params.resolve()?;
        let mut grid = args.xi.clone();
        match (args.from, args.to, args.step) {
            (None, None, None) => {}
            (Some(from), Some(to), Some(step)) if step > 0.0 && to >= from => {
                let count = ((to - from) / step + 1e-9).floor() as u64;
                grid.extend((0..=count).map(|i| from + i as f64 * step));
            }
            _ => {
                return Err(CliError::Usage(
                    "--from, --to and --step go together, with step > 0 and to >= from".into(),
                ))
            }
        }
        if grid.is_empty() && !args.median {
            return Err(CliError::Usage("give --xi, a --from/--to/--step grid, or --median".into()));
        }
        (params, grid, args.median)
    };
    let mut records = Vec::with_capacity(grid.len() + 1);
    for xi in grid {
        let s = nhat_survival(xi, &params)?;
        records.push(
            params_record("survival", &params)
                .input("n", float(xi))
                .output("survival", float(s)),
        );
    }
    if with_median {
        records.push(params_record("median", &params).output("median", nhat_median(&params)?));
    }
    Ok(records)
}

pub fn cmd_moments(args: &MomentsArgs) -> Result<Vec<OutputRecord>, CliError> {
    let rows: Vec<ModelParams> = if expect_table(args.table, &[2], "moments")?.is_some() {
        presets::MOMENTS
            .iter()
            .map(|&(n, p, m)| ModelParams::new(n, p, m))
            .collect::<Result<_, _>>()?
    } else {
        vec![args.params.resolve()?]
    };
    rows.iter()
        .map(|params| {
            let mo = nhat_moments(params)?;
            Ok(params_record("moments", params)
                .output("mean", float(mo.mean))
                .output("variance", float(mo.variance))
                .output("std", float(mo.std))
                .output("skewness", float(mo.skewness))
                .output("second_moment", float(mo.second_moment))
                .output("third_moment", float(mo.third_moment)))
        })
        .collect()
}

pub fn cmd_efficiency(args: &EfficiencyArgs) -> Result<Vec<OutputRecord>, CliError> {
    let rows: Vec<(ModelParams, u64)> = if expect_table(args.table, &[3], "efficiency")?.is_some() {
        presets::EFFICIENCY
            .iter()
            .map(|&(n, p, m, k)| Ok((ModelParams::new(n, p, m)?, k)))
            .collect::<Result<_, Error>>()?
    } else {
        let params = args.params.resolve()?;
        if args.k.is_empty() {
            return Err(CliError::Usage("--k is required".into()));
        }
        args.k.iter().map(|&k| (params, k)).collect()
    };
    rows.iter()
        .map(|(params, k)| {
            Ok(params_record("efficiency", params)
                .input("k", *k)
                .output("relative_efficiency", float(relative_efficiency(params, *k)?)))
        })
        .collect()
}

pub fn cmd_design(args: &DesignArgs) -> Result<Vec<OutputRecord>, CliError> {
    let params = args.params.resolve()?;
    let precision = if args.z_multiplier {
        PrecisionSpec::with_normal_multiplier(args.gamma, args.alpha)?
    } else {
        PrecisionSpec::new(args.gamma)?
    };
    let size = k_oracle(&params, &precision)?;
    let mut rec = params_record("design", &params)
        .input("gamma", args.gamma)
        .input(
            "multiplier",
            if args.z_multiplier { "z" } else { "2" },
        )
        .output("k0", size.k_value)
        .output("k_exact", float(size.k_exact))
        .output("xi", float(size.xi))
        .output("residual", float(size.residual));
    if args.expect {
        let moments = expected_k_two_stage(&params, &precision, args.k1)?;
        let k_ts = args.k_ts.unwrap_or(moments.mean.floor() as u64 + 1);
        let cp = coverage_two_stage(&params, args.gamma, k_ts)?;
        rec = rec
            .input("k1", args.k1)
            .output("expected_k_ts", float(moments.mean))
            .output("std_k_ts", float(moments.std))
            .output("cp_k", k_ts)
            .output("cp", float(cp));
    }
    Ok(vec![rec])
}

fn simulation_record(config: &ProcedureConfig) -> Result<OutputRecord, CliError> {
    let runs = replicate_runs(config)?;
    // With every replica aborted the first failure is more useful than the count.
    if let Some(Err(e)) = runs.first() {
        if runs.iter().all(Result::is_err) {
            return Err(e.clone().into());
        }
    }
    let summary = summarize(config.replicas, &runs)?;
    let mode = match (config.procedure, config.two_stage_mode) {
        (Procedure::Sequential, _) => "running",
        (Procedure::TwoStage, TwoStageMode::Augment) => "augment",
        (Procedure::TwoStage, TwoStageMode::Resample) => "resample",
    };
    Ok(params_record("simulate", &config.params)
        .input("k1", config.k1)
        .input("gamma", config.precision.gamma)
        .input("procedure", config.procedure.label())
        .input("final_sample", mode)
        .input("replicas", config.replicas)
        .output("mean_k", float(summary.mean_k))
        .output("std_k", opt_float(summary.std_k))
        .output("q025_k", float(summary.q025_k))
        .output("q975_k", float(summary.q975_k))
        .output("mean_n_hat", float(summary.mean_n_hat))
        .output("mean_p_hat", float(summary.mean_p_hat))
        .output("mean_half_width", float(summary.mean_half_width))
        .output("aborted", summary.aborted)
        .with_seed(config.seed))
}

/// Configurations behind `simulate --table 4` / `--table 5`.
pub fn preset_simulations(table: u8, seed: u64) -> Result<Vec<ProcedureConfig>, Error> {
    let make = |(n, p, m, k1, gamma): (u64, f64, u64, u64, f64), procedure| {
        ProcedureConfig::new(
            ModelParams::new(n, p, m)?,
            k1,
            PrecisionSpec::new(gamma)?,
            procedure,
            presets::PRESET_REPLICAS,
            seed,
        )
    };
    match table {
        4 => Ok(vec![
            make(presets::COMPARISON, Procedure::TwoStage)?
                .with_two_stage_mode(TwoStageMode::Resample),
            make(presets::COMPARISON, Procedure::Sequential)?,
        ]),
        5 => presets::SEQUENTIAL
            .iter()
            .map(|&row| make(row, Procedure::Sequential))
            .collect(),
        other => Err(crate::error::domain(format!("no simulation preset {other}"))),
    }
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<Vec<OutputRecord>, CliError> {
    let configs = if let Some(table) = expect_table(args.table, &[4, 5], "simulate")? {
        let seed = args
            .seed
            .ok_or_else(|| CliError::Usage("--seed is required with --table".into()))?;
        preset_simulations(table, seed)?
    } else {
        let gamma = args
            .gamma
            .ok_or_else(|| CliError::Usage("--gamma is required".into()))?;
        let procedure = match args.procedure {
            ProcedureArg::TwoStage => Procedure::TwoStage,
            ProcedureArg::Sequential => Procedure::Sequential,
        };
        let mode = if args.compat_resample {
            TwoStageMode::Resample
        } else {
            TwoStageMode::Augment
        };
        vec![ProcedureConfig::new(
            args.params.resolve()?,
            args.k1,
            PrecisionSpec::new(gamma)?,
            procedure,
            args.replicas,
            args.seed.unwrap_or(1),
        )?
        .with_two_stage_mode(mode)]
    };
    configs.iter().map(simulation_record).collect()
}

pub fn cmd_estimate(args: &EstimateArgs) -> Result<Vec<OutputRecord>, CliError> {
    if let Some(path) = &args.file {
        if args.x.is_some() || args.t.is_some() {
            return Err(CliError::Usage("--file excludes --x and --t".into()));
        }
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let sample = samples::parse_sample_file(&text)?;
        let mut methods = vec![EstimatorKind::ProductOfMeans];
        if sample.is_paired() {
            methods.insert(0, EstimatorKind::MeanOfProducts);
        }
        return methods
            .into_iter()
            .map(|method| {
                let r = EstimateReport::from_sample(&sample, method, args.alpha)?;
                Ok(OutputRecord::new("estimate")
                    .input("m", sample.m())
                    .input("k", r.k_final)
                    .input("method", method.label())
                    .output("n_hat", float(r.n_hat))
                    .output("p_hat", float(r.p_hat))
                    .output("ci_low", float(r.ci_low))
                    .output("ci_high", float(r.ci_high)))
            })
            .collect();
    }
    let (Some(x), Some(t), Some(m)) = (args.x, args.t, args.m) else {
        return Err(CliError::Usage("give --x, --t and --m, or --file".into()));
    };
    let n_hat = nhat_single(x, t, m)?;
    Ok(vec![OutputRecord::new("estimate")
        .input("x", x)
        .input("t", t)
        .input("m", m)
        .output("n_hat", float(n_hat))
        .output("p_hat", float(m as f64 / t as f64))])
}

pub fn cmd_coverage(args: &CoverageArgs) -> Result<Vec<OutputRecord>, CliError> {
    let params = args.params.resolve()?;
    let var_true = var_mean_of_products(&params, 1)?;
    let rec = params_record("coverage", &params).input("alpha", args.alpha);
    if let Some(s2) = args.s2 {
        let cp = conditional_coverage(s2, var_true, args.alpha)?;
        return Ok(vec![rec
            .input("s2", s2)
            .output("var_true", float(var_true))
            .output("conditional_coverage", float(cp))]);
    }
    let experiment = CoverageExperiment {
        params,
        k: args.k,
        alpha: args.alpha,
        replicas: args.replicas,
        seed: args.seed,
        split_sample: !args.no_split,
    };
    let est = experiment.run()?;
    Ok(vec![rec
        .input("k", args.k)
        .input("replicas", args.replicas)
        .input("split_sample", !args.no_split)
        .output("empirical_coverage", float(est.empirical))
        .output("mean_conditional_coverage", float(est.mean_conditional))
        .with_seed(args.seed)])
}

pub fn execute(command: &Command) -> Result<Vec<OutputRecord>, CliError> {
    match command {
        Command::Survival(a) => cmd_survival(a),
        Command::Moments(a) => cmd_moments(a),
        Command::Efficiency(a) => cmd_efficiency(a),
        Command::Design(a) => cmd_design(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Coverage(a) => cmd_coverage(a),
    }
}

/// Parses `args`, runs the command and returns the rendered output.
pub fn run_with_args<I, T>(args: I) -> Result<String, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Usage(e.to_string()))?;
    let records = execute(&cli.command)?;
    Ok(render(&records, cli.format, cli.precision))
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(records) => {
            print!("{}", render(&records, cli.format, cli.precision));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("nhat: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
