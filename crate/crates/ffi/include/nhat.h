#ifndef NHAT_H
#define NHAT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum NhatStatus {
  NHAT_STATUS_OK = 0,
  NHAT_STATUS_NULL_POINTER = 1,
  NHAT_STATUS_DOMAIN = 2,
  NHAT_STATUS_DEGENERATE_PILOT = 3,
  NHAT_STATUS_TOLERANCE_NOT_MET = 4,
  NHAT_STATUS_RUNAWAY_STOPPING_RULE = 5,
  NHAT_STATUS_TOO_MANY_ABORTS = 6,
  NHAT_STATUS_PARSE = 7,
  NHAT_STATUS_PANIC = 8,
} NhatStatus;

// Procedure selector for [`nhat_simulation_new`].
typedef enum NhatProcedure {
  NHAT_PROCEDURE_TWO_STAGE = 0,
  NHAT_PROCEDURE_SEQUENTIAL = 1,
} NhatProcedure;

// Seeded random stream for pair draws.
typedef struct NhatSampler NhatSampler;

// A configured replication run.
typedef struct NhatSimulation NhatSimulation;

typedef struct NhatMoments {
  double mean;
  double second_moment;
  double third_moment;
  double variance;
  double std;
  double skewness;
} NhatMoments;

typedef struct NhatSampleSize {
  uint64_t k_value;
  double k_exact;
  double xi;
  double residual;
} NhatSampleSize;

// Replication summary; a missing standard deviation (one replica) is NaN.
typedef struct NhatSummary {
  uint64_t replicas;
  uint64_t aborted;
  double mean_k;
  double std_k;
  double q025_k;
  double q975_k;
  double mean_n_hat;
  double std_n_hat;
  double mean_p_hat;
  double mean_half_width;
} NhatSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *nhat_version(void);

// Message of the last failed call on this thread, or NULL if none.
// The pointer stays valid until the next failing call on the same thread.
const char *nhat_last_error_message(void);

// # Safety
// `out` must be NULL or valid for a write of one `double`.
enum NhatStatus nhat_binom_pmf(uint64_t j, uint64_t n, double p, double *out);

// # Safety
// `out` must be NULL or valid for a write of one `double`.
enum NhatStatus nhat_negbin_pmf(uint64_t y, uint64_t m, double p, double *out);

// P(Y > y) for Y ~ NB(m, p).
//
// # Safety
// `out` must be NULL or valid for a write of one `double`.
enum NhatStatus nhat_negbin_tail(double y, uint64_t m, double p, double *out);

// P(N̂ > xi).
//
// # Safety
// `out` must be NULL or valid for a write of one `double`.
enum NhatStatus nhat_survival(double xi, uint64_t n, double p, uint64_t m, double *out);

// # Safety
// `out` must be NULL or valid for a write of one `uint64_t`.
enum NhatStatus nhat_median(uint64_t n, double p, uint64_t m, uint64_t *out);

// # Safety
// `out` must be NULL or valid for a write of one `NhatMoments`.
enum NhatStatus nhat_moments(uint64_t n, double p, uint64_t m, struct NhatMoments *out);

// # Safety
// `out` must be NULL or valid for a write of one `double`.
enum NhatStatus nhat_var_mean_of_products(uint64_t n,
                                          double p,
                                          uint64_t m,
                                          uint64_t k,
                                          double *out);

// # Safety
// `out` must be NULL or valid for a write of one `double`.
enum NhatStatus nhat_var_product_of_means(uint64_t n,
                                          double p,
                                          uint64_t m,
                                          uint64_t k1,
                                          uint64_t k2,
                                          double *out);

// # Safety
// `out` must be NULL or valid for a write of one `double`.
enum NhatStatus nhat_relative_efficiency(uint64_t n, double p, uint64_t m, uint64_t k, double *out);

// N̂ = x·t/m for a single pair.
//
// # Safety
// `out` must be NULL or valid for a write of one `double`.
enum NhatStatus nhat_estimate_single(uint64_t x, uint64_t t, uint64_t m, double *out);

// # Safety
// `out` must be NULL or valid for a write of one `double`.
enum NhatStatus nhat_conditional_coverage(double s2, double var_true, double alpha, double *out);

// Oracle sample size with the multiplier 2.
//
// # Safety
// `out` must be NULL or valid for a write of one `NhatSampleSize`.
enum NhatStatus nhat_k_oracle(uint64_t n,
                              double p,
                              uint64_t m,
                              double gamma,
                              struct NhatSampleSize *out);

// Plug-in sample size from pilot means.
//
// # Safety
// `out` must be NULL or valid for a write of one `uint64_t`.
enum NhatStatus nhat_k_two_stage(double x_bar,
                                 double t_bar,
                                 uint64_t m,
                                 double gamma,
                                 uint64_t *out);

// Asymptotic mean and standard deviation of the plug-in size.
//
// # Safety
// `out_mean` and `out_std` must each be NULL or valid for a write of one `double`.
enum NhatStatus nhat_expected_k_two_stage(uint64_t n,
                                          double p,
                                          uint64_t m,
                                          double gamma,
                                          uint64_t k1,
                                          double *out_mean,
                                          double *out_std);

// Coverage of the proportional-closeness interval at final size `k_ts`.
//
// # Safety
// `out` must be NULL or valid for a write of one `double`.
enum NhatStatus nhat_coverage_two_stage(uint64_t n,
                                        double p,
                                        uint64_t m,
                                        double gamma,
                                        uint64_t k_ts,
                                        double *out);

// New random stream; never NULL. Free with [`nhat_sampler_free`].
struct NhatSampler *nhat_sampler_new(uint64_t seed, uint64_t stream_id);

// # Safety
// `sampler` must be NULL or a live handle from [`nhat_sampler_new`].
void nhat_sampler_free(struct NhatSampler *sampler);

// # Safety
// `sampler` must be NULL or a live handle not used concurrently elsewhere;
// `out` must be NULL or valid for a write of one `uint64_t`.
enum NhatStatus nhat_sampler_binomial(struct NhatSampler *sampler,
                                      uint64_t n,
                                      double p,
                                      uint64_t *out);

// Pascal waiting time: trials up to the m-th success.
//
// # Safety
// As for [`nhat_sampler_binomial`].
enum NhatStatus nhat_sampler_pascal(struct NhatSampler *sampler,
                                    uint64_t m,
                                    double p,
                                    uint64_t *out);

// Validates a replication setup and stores a new handle in `out`.
// `procedure` takes an [`NhatProcedure`] value. Two-stage runs augment the pilot unless [`nhat_simulation_set_resample`]
// is called.
//
// # Safety
// `out` must be NULL or valid for a write of one pointer.
enum NhatStatus nhat_simulation_new(uint64_t n,
                                    double p,
                                    uint64_t m,
                                    uint64_t k1,
                                    double gamma,
                                    uint32_t procedure,
                                    uint64_t replicas,
                                    uint64_t seed,
                                    struct NhatSimulation **out);

// Switch two-stage runs between drawing a fresh final sample (`resample`
// true) and augmenting the pilot.
//
// # Safety
// `sim` must be NULL or a live handle from [`nhat_simulation_new`].
enum NhatStatus nhat_simulation_set_resample(struct NhatSimulation *sim, bool resample);

// Runs every replica and writes the summary.
//
// # Safety
// `sim` must be NULL or a live handle; `out` must be NULL or valid for a
// write of one `NhatSummary`.
enum NhatStatus nhat_simulation_run(const struct NhatSimulation *sim, struct NhatSummary *out);

// # Safety
// `sim` must be NULL or a live handle from [`nhat_simulation_new`].
void nhat_simulation_free(struct NhatSimulation *sim);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NHAT_H */
