/* SPDX-License-Identifier: Apache-2.0 */
/* Compiled as C to keep the header C-clean. */
#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "epsqmc/epsqmc.h"

static int failures = 0;

#define EXPECT(cond)                                                      \
    do                                                                    \
    {                                                                     \
        if (!(cond))                                                      \
        {                                                                 \
            fprintf(stderr, "%s:%d: EXPECT(%s) failed\n", __FILE__, __LINE__, #cond); \
            ++failures;                                                   \
        }                                                                 \
    } while (0)

static void test_algebra(void)
{
    double m[4];
    double lo, hi;
    EXPECT(epsqmc_swap_matrix(0.6, 0.5, m) == EPSQMC_OK);
    EXPECT(fabs(m[0] - 0.7) < 1e-15 && fabs(m[1] - 0.3) < 1e-15);
    EXPECT(fabs(m[0] + m[1] - 1.0) < 1e-15 && fabs(m[2] + m[3] - 1.0) < 1e-15);

    EXPECT(epsqmc_swap_matrix(1.8, 0.9, m) == EPSQMC_VALIDATION);
    EXPECT(strlen(epsqmc_last_error()) > 0);
    EXPECT(epsqmc_swap_matrix(0.5, 0.5, NULL) == EPSQMC_VALIDATION);

    EXPECT(epsqmc_valid_v_interval(2.0, &lo, &hi) == EPSQMC_OK);
    EXPECT(lo == 0.5 && hi == 0.5);
}

static void test_simulation(void)
{
    epsqmc_estimate e;
    double ks[3] = {0.9, -0.5, 0.7};
    EXPECT(epsqmc_simulate_product(0.6, 0.4, 0.5, 100000, 7, 2, &e) == EPSQMC_OK);
    EXPECT(fabs(e.value - 0.24) < 4 * e.std_error);
    EXPECT(e.count0 + e.count1 == 100000);
    EXPECT(epsqmc_simulate_chain(ks, 3, 0.4, 0.5, 100000, 7, 2, &e) == EPSQMC_OK);
    EXPECT(fabs(e.value + 0.126) < 4 * e.std_error);
    EXPECT(epsqmc_simulate_cancellation(0.6, 0.4, 0.5, 100000, 7, 2, &e) == EPSQMC_OK);
    EXPECT(fabs(e.value) < 4 * e.std_error);
    EXPECT(epsqmc_simulate_product(0.6, 0.4, 0.5, 0, 7, 2, &e) == EPSQMC_VALIDATION);
}

static void test_kernels(void)
{
    double x;
    double cubic[4] = {0, 0, 0, 1};
    double quadratic[3] = {0, 0, 0.5};
    EXPECT(epsqmc_airy_ai(0.0, &x) == EPSQMC_OK && fabs(x - 0.3550280539) < 1e-9);
    EXPECT(epsqmc_kernel_value(0.0, 0.0, cubic, 4, &x) == EPSQMC_OK);
    EXPECT(fabs(x - 0.19537946754236894135) < 1e-6);
    EXPECT(epsqmc_kernel_value(0.0, 0.0, quadratic, 3, &x) == EPSQMC_VALIDATION);
    EXPECT(epsqmc_phase_series(0.0, 1.0, cubic, 4, &x) == EPSQMC_OK);
    EXPECT(epsqmc_langevin_step(1.0, 0.5, 0.25, quadratic, 3, &x) == EPSQMC_OK);
    {
        double y;
        EXPECT(epsqmc_noise_for_target(x, 1.0, 0.5, quadratic, 3, &y) == EPSQMC_OK);
        EXPECT(fabs(y - 0.25) < 1e-14);
    }
}

static void test_job(void)
{
    const char* text =
        "{\"lattice\": {\"n_slices\": 3, \"n_points\": 5, \"u_min\": -1, \"u_max\": 1},"
        " \"potential\": {\"coefficients\": [0, 0, 0.5, 0, 0.1]},"
        " \"psi0\": {\"family\": \"gaussian\", \"width\": 0.7},"
        " \"run\": {\"histories\": 20000}}";
    char dir[512];
    epsqmc_job* job = NULL;
    epsqmc_result* result = NULL;
    double sum = 0.0;
    size_t i;

    EXPECT(epsqmc_job_parse("{\"run\": {\"vv\": 1}}", NULL, &job) == EPSQMC_VALIDATION);
    EXPECT(job == NULL);
    EXPECT(strstr(epsqmc_last_error(), "vv") != NULL);

    EXPECT(epsqmc_job_parse(text, NULL, &job) == EPSQMC_OK);
    EXPECT(epsqmc_job_subcommand(job) == NULL);
    EXPECT(strstr(epsqmc_job_echo(job), "\"strategy\": \"uniform\"") != NULL);
    snprintf(dir, sizeof dir, "%s/epsqmc_test_capi", getenv("TMPDIR") ? getenv("TMPDIR") : "/tmp");
    EXPECT(epsqmc_job_set_output(job, dir) == EPSQMC_OK);
    EXPECT(epsqmc_job_set_workers(job, 2) == EPSQMC_OK);
    EXPECT(epsqmc_job_set_seed(job, 11) == EPSQMC_OK);

    EXPECT(epsqmc_job_run(job, "simulate", &result) == EPSQMC_VALIDATION);
    EXPECT(epsqmc_job_run(job, "oracle", &result) == EPSQMC_OK);
    EXPECT(epsqmc_result_bins(result) == 5);
    for (i = 0; i < epsqmc_result_bins(result); ++i)
    {
        double q;
        EXPECT(epsqmc_result_get(result, i, NULL, NULL, NULL, &q, NULL) == EPSQMC_OK);
        sum += q;
    }
    EXPECT(sum > 0.5 && sum < 1.5);
    EXPECT(epsqmc_result_get(result, 5, NULL, NULL, NULL, NULL, NULL) == EPSQMC_VALIDATION);
    EXPECT(epsqmc_result_file_count(result) == 2);
    EXPECT(strstr(epsqmc_result_file(result, 0), "oracle.csv") != NULL);
    EXPECT(epsqmc_result_file(result, 2) == NULL);
    epsqmc_result_free(result);
    epsqmc_job_free(job);
}

int main(void)
{
    EXPECT(strlen(epsqmc_version()) > 0);
    test_algebra();
    test_simulation();
    test_kernels();
    test_job();
    if (failures)
    {
        fprintf(stderr, "%d failure(s)\n", failures);
        return 1;
    }
    printf("all C API checks passed\n");
    return 0;
}
