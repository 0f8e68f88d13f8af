/* SPDX-License-Identifier: Apache-2.0 */
/*
 * C interface to the epsqmc library. Every fallible call returns an
 * epsqmc_status; on failure epsqmc_last_error() describes the cause for the
 * calling thread until its next failing call. Handles are opaque and owned
 * by the caller.
 */
#ifndef EPSQMC_EPSQMC_H
#define EPSQMC_EPSQMC_H

#include <stddef.h>
#include <stdint.h>

#if defined(EPSQMC_BUILDING_LIBRARY)
#define EPSQMC_API __attribute__((visibility("default")))
#else
#define EPSQMC_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum epsqmc_status
{
    EPSQMC_OK = 0,
    EPSQMC_VALIDATION = 1, /* bad input; maps to CLI exit code 1 */
    EPSQMC_NUMERICAL = 2,  /* failed numerical diagnostic; exit code 2 */
    EPSQMC_INTERNAL = 3
} epsqmc_status;

EPSQMC_API const char* epsqmc_version(void);
EPSQMC_API const char* epsqmc_last_error(void);
/* Measured quantity attached to the last EPSQMC_NUMERICAL failure. */
EPSQMC_API double epsqmc_last_measured(void);

/* ---- eps algebra ---- */
/* Column-major entries m[0] = m00, m[1] = m10, m[2] = m01, m[3] = m11. */
EPSQMC_API epsqmc_status epsqmc_swap_matrix(double g, double v, double m[4]);
EPSQMC_API epsqmc_status epsqmc_valid_v_interval(double g, double* lo, double* hi);

typedef struct epsqmc_estimate
{
    double value;
    double std_error;
    uint64_t count0;
    uint64_t count1;
} epsqmc_estimate;

/* workers = 0 uses the hardware concurrency, capped by EPSQMC_MAX_WORKERS. */
EPSQMC_API epsqmc_status epsqmc_simulate_product(double k, double w, double v, uint64_t histories,
                                                 uint64_t seed, unsigned workers,
                                                 epsqmc_estimate* out);
EPSQMC_API epsqmc_status epsqmc_simulate_chain(const double* ks, size_t n_ks, double w, double v,
                                               uint64_t histories, uint64_t seed, unsigned workers,
                                               epsqmc_estimate* out);
EPSQMC_API epsqmc_status epsqmc_simulate_cancellation(double k, double w, double v,
                                                      uint64_t histories, uint64_t seed,
                                                      unsigned workers, epsqmc_estimate* out);

/* ---- kernels and lattice dynamics ---- */
/* coeffs[i] multiplies u^i. */
EPSQMC_API epsqmc_status epsqmc_airy_ai(double z, double* out);
EPSQMC_API epsqmc_status epsqmc_phase_series(double u, double w, const double* coeffs,
                                             size_t n_coeffs, double* out);
/* Kernel with default quadrature settings. */
EPSQMC_API epsqmc_status epsqmc_kernel_value(double y, double u, const double* coeffs,
                                             size_t n_coeffs, double* out);
EPSQMC_API epsqmc_status epsqmc_langevin_step(double u_now, double u_prev, double y,
                                              const double* coeffs, size_t n_coeffs, double* out);
EPSQMC_API epsqmc_status epsqmc_noise_for_target(double u_target, double u_now, double u_prev,
                                                 const double* coeffs, size_t n_coeffs,
                                                 double* out);

/* ---- config-driven jobs ---- */
typedef struct epsqmc_job epsqmc_job;
typedef struct epsqmc_result epsqmc_result;

/* base_dir resolves relative paths in the config; NULL means ".". */
EPSQMC_API epsqmc_status epsqmc_job_parse(const char* text, const char* base_dir, epsqmc_job** out);
EPSQMC_API epsqmc_status epsqmc_job_load(const char* path, epsqmc_job** out);
EPSQMC_API void epsqmc_job_free(epsqmc_job* job);

/* Subcommand recorded in the config, or NULL when absent. Owned by the job. */
EPSQMC_API const char* epsqmc_job_subcommand(const epsqmc_job* job);
EPSQMC_API epsqmc_status epsqmc_job_set_seed(epsqmc_job* job, uint64_t seed);
EPSQMC_API epsqmc_status epsqmc_job_set_output(epsqmc_job* job, const char* dir);
EPSQMC_API epsqmc_status epsqmc_job_set_force(epsqmc_job* job, int force);
EPSQMC_API epsqmc_status epsqmc_job_set_workers(epsqmc_job* job, unsigned workers);
/* Replaces the compare inputs. */
EPSQMC_API epsqmc_status epsqmc_job_set_inputs(epsqmc_job* job, const char* const* paths, size_t n);
/* Full config with defaults, as JSON. Owned by the job; valid until the next call. */
EPSQMC_API const char* epsqmc_job_echo(epsqmc_job* job);

/* subcommand: demo-eps, sample, oracle, amplitude, reference or compare. */
EPSQMC_API epsqmc_status epsqmc_job_run(epsqmc_job* job, const char* subcommand, epsqmc_result** out);

EPSQMC_API void epsqmc_result_free(epsqmc_result* result);
/* Terminal summary, including the files written. Owned by the result. */
EPSQMC_API const char* epsqmc_result_summary(const epsqmc_result* result);
EPSQMC_API size_t epsqmc_result_file_count(const epsqmc_result* result);
EPSQMC_API const char* epsqmc_result_file(const epsqmc_result* result, size_t i);
/* Number of bins; 0 for subcommands without a result table. */
EPSQMC_API size_t epsqmc_result_bins(const epsqmc_result* result);
EPSQMC_API epsqmc_status epsqmc_result_get(const epsqmc_result* result, size_t bin,
                                           double* center, uint64_t* h0, uint64_t* h1,
                                           double* q_hat, double* std_error);

#ifdef __cplusplus
}
#endif

#endif
