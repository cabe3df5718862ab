use std::ffi::CStr;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use nhat_ffi::*;

fn last_error() -> String {
    let p = nhat_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(nhat_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn closed_form_values() {
    unsafe {
        let mut s = 0.0;
        assert_eq!(nhat_survival(300.0, 300, 0.4, 10, &mut s), NhatStatus::Ok);
        assert!((s - 0.4500).abs() < 5e-4);

        let mut median = 0;
        assert_eq!(nhat_median(300, 0.4, 10, &mut median), NhatStatus::Ok);
        assert_eq!(median, 291);

        let mut mo = NhatMoments::default();
        assert_eq!(nhat_moments(500, 0.6, 10, &mut mo), NhatStatus::Ok);
        assert!((mo.std - 101.719).abs() < 1e-3);
        assert!((mo.skewness - 0.7057).abs() < 1e-4);

        let mut re = 0.0;
        assert_eq!(nhat_relative_efficiency(500, 0.6, 10, 10, &mut re), NhatStatus::Ok);
        assert!((re - 0.99884).abs() < 1e-5);

        let mut size = NhatSampleSize::default();
        assert_eq!(nhat_k_oracle(500, 0.6, 10, 0.01, &mut size), NhatStatus::Ok);
        assert_eq!(size.k_value, 1654);

        let mut k = 0;
        assert_eq!(nhat_k_two_stage(300.0, 50.0 / 3.0, 10, 0.01, &mut k), NhatStatus::Ok);
        assert_eq!(k, 1654);

        let (mut mean, mut std) = (0.0, 0.0);
        assert_eq!(nhat_expected_k_two_stage(500, 0.6, 10, 0.01, 100, &mut mean, &mut std), NhatStatus::Ok);
        assert!((mean - 1652.393).abs() < 1.0 && (std - 49.6425).abs() < 0.5);

        let mut cp = 0.0;
        assert_eq!(nhat_coverage_two_stage(500, 0.6, 10, 0.01, 1653, &mut cp), NhatStatus::Ok);
        assert!((cp - 0.9544).abs() < 0.002);

        let mut c = 0.0;
        assert_eq!(nhat_conditional_coverage(436.5608, 469.333, 0.05, &mut c), NhatStatus::Ok);
        assert!((c - 0.9413).abs() < 2e-4);

        let mut est = 0.0;
        assert_eq!(nhat_estimate_single(3580, 25, 10, &mut est), NhatStatus::Ok);
        assert_eq!(est, 8950.0);

        let (mut a, mut b) = (0.0, 0.0);
        assert_eq!(nhat_var_mean_of_products(500, 0.6, 10, 10, &mut a), NhatStatus::Ok);
        assert_eq!(nhat_var_product_of_means(500, 0.6, 10, 10, 10, &mut b), NhatStatus::Ok);
        assert!((b / a - re).abs() < 1e-12);

        let (mut pmf, mut tail, mut nb) = (0.0, 0.0, 0.0);
        assert_eq!(nhat_binom_pmf(0, 5, 0.5, &mut pmf), NhatStatus::Ok);
        assert!((pmf - 1.0 / 32.0).abs() < 1e-16);
        assert_eq!(nhat_negbin_pmf(0, 3, 0.5, &mut nb), NhatStatus::Ok);
        assert_eq!(nhat_negbin_tail(-1.0, 3, 0.5, &mut tail), NhatStatus::Ok);
        assert_eq!(tail, 1.0);
        assert!((nb - 0.125).abs() < 1e-16);
    }
}

#[test]
fn errors_set_status_and_message() {
    unsafe {
        let mut out = -1.0;
        assert_eq!(nhat_survival(1.0, 10, 1.5, 2, &mut out), NhatStatus::Domain);
        assert_eq!(out, -1.0);
        assert!(!last_error().is_empty());

        assert_eq!(nhat_survival(1.0, 10, 0.5, 2, ptr::null_mut()), NhatStatus::NullPointer);
        assert!(last_error().contains("null"));

        let mut mean = 0.0;
        assert_eq!(
            nhat_expected_k_two_stage(500, 0.6, 10, 0.01, 10, &mut mean, ptr::null_mut()),
            NhatStatus::NullPointer
        );
        let mut std = 0.0;
        assert_eq!(
            nhat_expected_k_two_stage(500, 0.6, 10, 0.01, 10, &mut mean, &mut std),
            NhatStatus::Domain
        );
    }
}

#[test]
fn sampler_handles_are_reproducible() {
    unsafe {
        let draw = |seed| {
            let s = nhat_sampler_new(seed, 3);
            let mut out = Vec::new();
            for _ in 0..50 {
                let (mut x, mut t) = (0, 0);
                assert_eq!(nhat_sampler_binomial(s, 300, 0.4, &mut x), NhatStatus::Ok);
                assert_eq!(nhat_sampler_pascal(s, 10, 0.4, &mut t), NhatStatus::Ok);
                assert!(x <= 300 && t >= 10);
                out.push((x, t));
            }
            nhat_sampler_free(s);
            out
        };
        assert_eq!(draw(9), draw(9));
        assert_ne!(draw(9), draw(10));

        let s = nhat_sampler_new(1, 0);
        let mut x = 0;
        assert_eq!(nhat_sampler_binomial(s, 10, -0.1, &mut x), NhatStatus::Domain);
        nhat_sampler_free(s);
        assert_eq!(nhat_sampler_pascal(ptr::null_mut(), 3, 0.5, &mut x), NhatStatus::NullPointer);
        nhat_sampler_free(ptr::null_mut());
    }
}

#[test]
fn simulation_handle_matches_library() {
    unsafe {
        let mut sim = ptr::null_mut();
        let status = nhat_simulation_new(
            100,
            0.4,
            10,
            100,
            0.05,
            NhatProcedure::TwoStage as u32,
            200,
            17,
            &mut sim,
        );
        assert_eq!(status, NhatStatus::Ok);
        assert_eq!(nhat_simulation_set_resample(sim, true), NhatStatus::Ok);
        let mut summary = NhatSummary::default();
        assert_eq!(nhat_simulation_run(sim, &mut summary), NhatStatus::Ok);
        nhat_simulation_free(sim);

        let config = nhat::ProcedureConfig::new(
            nhat::ModelParams::new(100, 0.4, 10).unwrap(),
            100,
            nhat::PrecisionSpec::new(0.05).unwrap(),
            nhat::Procedure::TwoStage,
            200,
            17,
        )
        .unwrap()
        .with_two_stage_mode(nhat::TwoStageMode::Resample);
        let want = nhat::replicate(&config).unwrap();
        assert_eq!(summary.mean_k, want.mean_k);
        assert_eq!(summary.mean_n_hat, want.mean_n_hat);
        assert_eq!(summary.replicas, 200);

        let mut bad = ptr::null_mut();
        assert_eq!(
            nhat_simulation_new(100, 0.4, 10, 100, 0.05, 7, 10, 1, &mut bad),
            NhatStatus::Domain
        );
        assert!(bad.is_null());
        assert_eq!(nhat_simulation_run(ptr::null(), &mut summary), NhatStatus::NullPointer);
    }
}

#[test]
fn single_replica_summary_reports_nan_std() {
    unsafe {
        let mut sim = ptr::null_mut();
        nhat_simulation_new(500, 0.6, 10, 100, 0.05, NhatProcedure::Sequential as u32, 1, 5, &mut sim);
        let mut summary = NhatSummary::default();
        assert_eq!(nhat_simulation_run(sim, &mut summary), NhatStatus::Ok);
        assert!(summary.std_k.is_nan());
        nhat_simulation_free(sim);
    }
}

fn target_dir() -> PathBuf {
    // tests run from <target>/<profile>/deps/
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn header_compiles_and_links_from_c() {
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    assert!(include.join("nhat.h").exists());
    let lib = target_dir().join("libnhat_ffi.a");
    if Command::new("cc").arg("--version").output().is_err() || !lib.exists() {
        eprintln!("skipping C link check: no cc or no {}", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include "nhat.h"

int main(void) {
    NhatSampleSize size;
    if (nhat_k_oracle(500, 0.6, 10, 0.01, &size) != NHAT_STATUS_OK) return 1;
    double s;
    if (nhat_survival(0.0, 1, 0.5, 1, &s) != NHAT_STATUS_OK) return 2;
    if (nhat_survival(0.0, 1, 2.0, 1, &s) != NHAT_STATUS_DOMAIN) return 3;
    if (nhat_last_error_message() == NULL) return 4;
    NhatSampler *r = nhat_sampler_new(1, 2);
    uint64_t t;
    if (nhat_sampler_pascal(r, 3, 0.5, &t) != NHAT_STATUS_OK || t < 3) return 5;
    nhat_sampler_free(r);
    printf("%llu %s\n", (unsigned long long)size.k_value, nhat_version());
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("capi_smoke");
    let status = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.trim(), format!("1654 {}", env!("CARGO_PKG_VERSION")));
}
