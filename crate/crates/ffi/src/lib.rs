//! C ABI for the `nhat` library.
//!
//! Every fallible call returns an [`NhatStatus`] and writes its result through
//! an out-pointer. On failure the out-pointer is left untouched and
//! [`nhat_last_error_message`] describes the error. Random draws and
//! simulations go through opaque handles that must be released with the
//! matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe, UnwindSafe};
use std::ptr;

use nhat::distributions::{BinomialSampler, PascalSampler};
use nhat::procedures::ReplicationSummary;
use nhat::rng::StreamRng;
use nhat::{
    ModelParams, PrecisionSpec, Procedure, ProcedureConfig, RngSeed, TwoStageMode,
};
use rand::distr::Distribution;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NhatStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    DegeneratePilot = 3,
    ToleranceNotMet = 4,
    RunawayStoppingRule = 5,
    TooManyAborts = 6,
    Parse = 7,
    Panic = 8,
}

/// Procedure selector for [`nhat_simulation_new`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NhatProcedure {
    TwoStage = 0,
    Sequential = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct NhatMoments {
    pub mean: f64,
    pub second_moment: f64,
    pub third_moment: f64,
    pub variance: f64,
    pub std: f64,
    pub skewness: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct NhatSampleSize {
    pub k_value: u64,
    pub k_exact: f64,
    pub xi: f64,
    pub residual: f64,
}

/// Replication summary; a missing standard deviation (one replica) is NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct NhatSummary {
    pub replicas: u64,
    pub aborted: u64,
    pub mean_k: f64,
    pub std_k: f64,
    pub q025_k: f64,
    pub q975_k: f64,
    pub mean_n_hat: f64,
    pub std_n_hat: f64,
    pub mean_p_hat: f64,
    pub mean_half_width: f64,
}

impl From<&ReplicationSummary> for NhatSummary {
    fn from(s: &ReplicationSummary) -> Self {
        Self {
            replicas: s.replicas,
            aborted: s.aborted,
            mean_k: s.mean_k,
            std_k: s.std_k.unwrap_or(f64::NAN),
            q025_k: s.q025_k,
            q975_k: s.q975_k,
            mean_n_hat: s.mean_n_hat,
            std_n_hat: s.std_n_hat.unwrap_or(f64::NAN),
            mean_p_hat: s.mean_p_hat,
            mean_half_width: s.mean_half_width,
        }
    }
}

/// Seeded random stream for pair draws.
pub struct NhatSampler {
    rng: StreamRng,
}

/// A configured replication run.
pub struct NhatSimulation {
    config: ProcedureConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn status_of(e: &nhat::Error) -> NhatStatus {
    use nhat::Error::*;
    match e {
        Domain(_) => NhatStatus::Domain,
        DegeneratePilot { .. } => NhatStatus::DegeneratePilot,
        ToleranceNotMet { .. } => NhatStatus::ToleranceNotMet,
        RunawayStoppingRule { .. } => NhatStatus::RunawayStoppingRule,
        TooManyAborts { .. } => NhatStatus::TooManyAborts,
        Parse { .. } => NhatStatus::Parse,
    }
}

/// Runs `f`, stores its value in `out` and maps errors and panics to a status.
fn guarded<T, F>(out: *mut T, f: F) -> NhatStatus
where
    F: FnOnce() -> nhat::Result<T> + UnwindSafe,
{
    if out.is_null() {
        set_last_error("output pointer is null".into());
        return NhatStatus::NullPointer;
    }
    match catch_unwind(f) {
        Ok(Ok(value)) => {
            // SAFETY: checked non-null above; the caller provides writable storage.
            unsafe { out.write(value) };
            NhatStatus::Ok
        }
        Ok(Err(e)) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_last_error("internal panic".into());
            NhatStatus::Panic
        }
    }
}

fn params(n: u64, p: f64, m: u64) -> nhat::Result<ModelParams> {
    ModelParams::new(n, p, m)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nhat_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL if none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn nhat_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `out` must be NULL or valid for a write of one `double`.
#[no_mangle]
pub unsafe extern "C" fn nhat_binom_pmf(j: u64, n: u64, p: f64, out: *mut f64) -> NhatStatus {
    guarded(out, || nhat::binom_pmf(j, n, p))
}

/// # Safety
/// `out` must be NULL or valid for a write of one `double`.
#[no_mangle]
pub unsafe extern "C" fn nhat_negbin_pmf(y: u64, m: u64, p: f64, out: *mut f64) -> NhatStatus {
    guarded(out, || nhat::negbin_pmf(y, m, p))
}

/// P(Y > y) for Y ~ NB(m, p).
///
/// # Safety
/// `out` must be NULL or valid for a write of one `double`.
#[no_mangle]
pub unsafe extern "C" fn nhat_negbin_tail(y: f64, m: u64, p: f64, out: *mut f64) -> NhatStatus {
    guarded(out, || nhat::negbin_tail(y, m, p))
}

/// P(N̂ > xi).
///
/// # Safety
/// `out` must be NULL or valid for a write of one `double`.
#[no_mangle]
pub unsafe extern "C" fn nhat_survival(xi: f64, n: u64, p: f64, m: u64, out: *mut f64) -> NhatStatus {
    guarded(out, || nhat::nhat_survival(xi, &params(n, p, m)?))
}

/// # Safety
/// `out` must be NULL or valid for a write of one `uint64_t`.
#[no_mangle]
pub unsafe extern "C" fn nhat_median(n: u64, p: f64, m: u64, out: *mut u64) -> NhatStatus {
    guarded(out, || nhat::nhat_median(&params(n, p, m)?))
}

/// # Safety
/// `out` must be NULL or valid for a write of one `NhatMoments`.
#[no_mangle]
pub unsafe extern "C" fn nhat_moments(n: u64, p: f64, m: u64, out: *mut NhatMoments) -> NhatStatus {
    guarded(out, || {
        let mo = nhat::nhat_moments(&params(n, p, m)?)?;
        Ok(NhatMoments {
            mean: mo.mean,
            second_moment: mo.second_moment,
            third_moment: mo.third_moment,
            variance: mo.variance,
            std: mo.std,
            skewness: mo.skewness,
        })
    })
}

/// # Safety
/// `out` must be NULL or valid for a write of one `double`.
#[no_mangle]
pub unsafe extern "C" fn nhat_var_mean_of_products(n: u64, p: f64, m: u64, k: u64, out: *mut f64) -> NhatStatus {
    guarded(out, || nhat::var_mean_of_products(&params(n, p, m)?, k))
}

/// # Safety
/// `out` must be NULL or valid for a write of one `double`.
#[no_mangle]
pub unsafe extern "C" fn nhat_var_product_of_means(
    n: u64,
    p: f64,
    m: u64,
    k1: u64,
    k2: u64,
    out: *mut f64,
) -> NhatStatus {
    guarded(out, || nhat::var_product_of_means(&params(n, p, m)?, k1, k2))
}

/// # Safety
/// `out` must be NULL or valid for a write of one `double`.
#[no_mangle]
pub unsafe extern "C" fn nhat_relative_efficiency(n: u64, p: f64, m: u64, k: u64, out: *mut f64) -> NhatStatus {
    guarded(out, || nhat::relative_efficiency(&params(n, p, m)?, k))
}

/// N̂ = x·t/m for a single pair.
///
/// # Safety
/// `out` must be NULL or valid for a write of one `double`.
#[no_mangle]
pub unsafe extern "C" fn nhat_estimate_single(x: u64, t: u64, m: u64, out: *mut f64) -> NhatStatus {
    guarded(out, || nhat::nhat_single(x, t, m))
}

/// # Safety
/// `out` must be NULL or valid for a write of one `double`.
#[no_mangle]
pub unsafe extern "C" fn nhat_conditional_coverage(s2: f64, var_true: f64, alpha: f64, out: *mut f64) -> NhatStatus {
    guarded(out, || nhat::conditional_coverage(s2, var_true, alpha))
}

/// Oracle sample size with the multiplier 2.
///
/// # Safety
/// `out` must be NULL or valid for a write of one `NhatSampleSize`.
#[no_mangle]
pub unsafe extern "C" fn nhat_k_oracle(n: u64, p: f64, m: u64, gamma: f64, out: *mut NhatSampleSize) -> NhatStatus {
    guarded(out, || {
        let r = nhat::k_oracle(&params(n, p, m)?, &PrecisionSpec::new(gamma)?)?;
        Ok(NhatSampleSize {
            k_value: r.k_value,
            k_exact: r.k_exact,
            xi: r.xi,
            residual: r.residual,
        })
    })
}

/// Plug-in sample size from pilot means.
///
/// # Safety
/// `out` must be NULL or valid for a write of one `uint64_t`.
#[no_mangle]
pub unsafe extern "C" fn nhat_k_two_stage(x_bar: f64, t_bar: f64, m: u64, gamma: f64, out: *mut u64) -> NhatStatus {
    guarded(out, || nhat::k_two_stage(x_bar, t_bar, m, gamma))
}

/// Asymptotic mean and standard deviation of the plug-in size.
///
/// # Safety
/// `out_mean` and `out_std` must each be NULL or valid for a write of one `double`.
#[no_mangle]
pub unsafe extern "C" fn nhat_expected_k_two_stage(
    n: u64,
    p: f64,
    m: u64,
    gamma: f64,
    k1: u64,
    out_mean: *mut f64,
    out_std: *mut f64,
) -> NhatStatus {
    if out_mean.is_null() || out_std.is_null() {
        set_last_error("output pointer is null".into());
        return NhatStatus::NullPointer;
    }
    let mut both = (0.0, 0.0);
    let status = guarded(&mut both, || {
        let mo = nhat::expected_k_two_stage(&params(n, p, m)?, &PrecisionSpec::new(gamma)?, k1)?;
        Ok((mo.mean, mo.std))
    });
    if status == NhatStatus::Ok {
        // SAFETY: both checked non-null above.
        unsafe {
            out_mean.write(both.0);
            out_std.write(both.1);
        }
    }
    status
}

/// Coverage of the proportional-closeness interval at final size `k_ts`.
///
/// # Safety
/// `out` must be NULL or valid for a write of one `double`.
#[no_mangle]
pub unsafe extern "C" fn nhat_coverage_two_stage(
    n: u64,
    p: f64,
    m: u64,
    gamma: f64,
    k_ts: u64,
    out: *mut f64,
) -> NhatStatus {
    guarded(out, || nhat::coverage_two_stage(&params(n, p, m)?, gamma, k_ts))
}

/// New random stream; never NULL. Free with [`nhat_sampler_free`].
#[no_mangle]
pub extern "C" fn nhat_sampler_new(seed: u64, stream_id: u64) -> *mut NhatSampler {
    Box::into_raw(Box::new(NhatSampler {
        rng: RngSeed::new(seed, stream_id).rng(),
    }))
}

/// # Safety
/// `sampler` must be NULL or a live handle from [`nhat_sampler_new`].
#[no_mangle]
pub unsafe extern "C" fn nhat_sampler_free(sampler: *mut NhatSampler) {
    if !sampler.is_null() {
        // SAFETY: the caller hands back ownership of a handle we allocated.
        drop(unsafe { Box::from_raw(sampler) });
    }
}

/// # Safety
/// `sampler` must be NULL or a live handle not used concurrently elsewhere;
/// `out` must be NULL or valid for a write of one `uint64_t`.
#[no_mangle]
pub unsafe extern "C" fn nhat_sampler_binomial(sampler: *mut NhatSampler, n: u64, p: f64, out: *mut u64) -> NhatStatus {
    // SAFETY: per the contract above.
    let Some(s) = (unsafe { sampler.as_mut() }) else {
        set_last_error("sampler handle is null".into());
        return NhatStatus::NullPointer;
    };
    // A panic mid-draw leaves the stream usable, if at an unspecified position.
    guarded(out, AssertUnwindSafe(|| Ok(BinomialSampler::new(n, p)?.sample(&mut s.rng))))
}

/// Pascal waiting time: trials up to the m-th success.
///
/// # Safety
/// As for [`nhat_sampler_binomial`].
#[no_mangle]
pub unsafe extern "C" fn nhat_sampler_pascal(sampler: *mut NhatSampler, m: u64, p: f64, out: *mut u64) -> NhatStatus {
    // SAFETY: per the contract above.
    let Some(s) = (unsafe { sampler.as_mut() }) else {
        set_last_error("sampler handle is null".into());
        return NhatStatus::NullPointer;
    };
    // A panic mid-draw leaves the stream usable, if at an unspecified position.
    guarded(out, AssertUnwindSafe(|| Ok(PascalSampler::new(m, p)?.sample(&mut s.rng))))
}

/// Validates a replication setup and stores a new handle in `out`.
/// `procedure` takes an [`NhatProcedure`] value. Two-stage runs augment the pilot unless [`nhat_simulation_set_resample`]
/// is called.
///
/// # Safety
/// `out` must be NULL or valid for a write of one pointer.
#[no_mangle]
pub unsafe extern "C" fn nhat_simulation_new(
    n: u64,
    p: f64,
    m: u64,
    k1: u64,
    gamma: f64,
    procedure: u32,
    replicas: u64,
    seed: u64,
    out: *mut *mut NhatSimulation,
) -> NhatStatus {
    guarded(out, || {
        let procedure = match procedure {
            0 => Procedure::TwoStage,
            1 => Procedure::Sequential,
            other => return Err(nhat::Error::Domain(format!("unknown procedure {other}"))),
        };
        let config = ProcedureConfig::new(
            params(n, p, m)?,
            k1,
            PrecisionSpec::new(gamma)?,
            procedure,
            replicas,
            seed,
        )?;
        Ok(Box::into_raw(Box::new(NhatSimulation { config })))
    })
}

/// Switch two-stage runs between drawing a fresh final sample (`resample`
/// true) and augmenting the pilot.
///
/// # Safety
/// `sim` must be NULL or a live handle from [`nhat_simulation_new`].
#[no_mangle]
pub unsafe extern "C" fn nhat_simulation_set_resample(sim: *mut NhatSimulation, resample: bool) -> NhatStatus {
    // SAFETY: per the contract above.
    let Some(s) = (unsafe { sim.as_mut() }) else {
        set_last_error("simulation handle is null".into());
        return NhatStatus::NullPointer;
    };
    s.config.two_stage_mode = if resample {
        TwoStageMode::Resample
    } else {
        TwoStageMode::Augment
    };
    NhatStatus::Ok
}

/// Runs every replica and writes the summary.
///
/// # Safety
/// `sim` must be NULL or a live handle; `out` must be NULL or valid for a
/// write of one `NhatSummary`.
#[no_mangle]
pub unsafe extern "C" fn nhat_simulation_run(sim: *const NhatSimulation, out: *mut NhatSummary) -> NhatStatus {
    // SAFETY: per the contract above.
    let Some(s) = (unsafe { sim.as_ref() }) else {
        set_last_error("simulation handle is null".into());
        return NhatStatus::NullPointer;
    };
    let config = s.config;
    guarded(out, move || Ok(NhatSummary::from(&nhat::replicate(&config)?)))
}

/// # Safety
/// `sim` must be NULL or a live handle from [`nhat_simulation_new`].
#[no_mangle]
pub unsafe extern "C" fn nhat_simulation_free(sim: *mut NhatSimulation) {
    if !sim.is_null() {
        // SAFETY: the caller hands back ownership of a handle we allocated.
        drop(unsafe { Box::from_raw(sim) });
    }
}
