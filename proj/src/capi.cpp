// SPDX-License-Identifier: Apache-2.0
#include "epsqmc/epsqmc.h"

#include <new>
#include <string>
#include <vector>

#include "epsqmc/airy.hpp"
#include "epsqmc/eps.hpp"
#include "epsqmc/error.hpp"
#include "epsqmc/job.hpp"
#include "epsqmc/kernels.hpp"
#include "epsqmc/lattice.hpp"

using namespace epsqmc;

struct epsqmc_job
{
    JobConfig config;
    JobOptions options;
    std::string subcommand;
    std::string echo;
};

struct epsqmc_result
{
    JobOutcome outcome;
};

namespace
{

thread_local std::string g_error;
thread_local double g_measured = 0.0;

epsqmc_status fail(epsqmc_status status, const char* what, double measured = 0.0)
{
    g_error = what;
    g_measured = measured;
    return status;
}

// Every entry point funnels exceptions through here; none may escape into C.
template <class F>
epsqmc_status guard(F&& body)
{
    try
    {
        body();
        return EPSQMC_OK;
    }
    catch (const ValidationError& e)
    {
        return fail(EPSQMC_VALIDATION, e.what());
    }
    catch (const NumericalError& e)
    {
        return fail(EPSQMC_NUMERICAL, e.what(), e.measured());
    }
    catch (const std::bad_alloc&)
    {
        return fail(EPSQMC_INTERNAL, "out of memory");
    }
    catch (const std::exception& e)
    {
        return fail(EPSQMC_INTERNAL, e.what());
    }
    catch (...)
    {
        return fail(EPSQMC_INTERNAL, "unknown error");
    }
}

void need(const void* p, const char* name)
{
    if (!p)
    {
        throw ValidationError(std::string(name) + " must not be NULL");
    }
}

Potential potential_of(const double* coeffs, std::size_t n)
{
    if (n > 0)
    {
        need(coeffs, "coeffs");
    }
    return Potential(std::vector<double>(coeffs, coeffs + n));
}

void copy(const Estimate& e, epsqmc_estimate* out)
{
    *out = {e.value, e.std_error, e.count0, e.count1};
}

}  // namespace

extern "C" {

const char* epsqmc_version(void)
{
    return EPSQMC_VERSION;
}

const char* epsqmc_last_error(void)
{
    return g_error.c_str();
}

double epsqmc_last_measured(void)
{
    return g_measured;
}

epsqmc_status epsqmc_swap_matrix(double g, double v, double m[4])
{
    return guard([&] {
        need(m, "m");
        SwapMatrix s(g, v);
        m[0] = s.m00();
        m[1] = s.m10();
        m[2] = s.m01();
        m[3] = s.m11();
    });
}

epsqmc_status epsqmc_valid_v_interval(double g, double* lo, double* hi)
{
    return guard([&] {
        need(lo, "lo");
        need(hi, "hi");
        Interval i = valid_v_interval(g);
        *lo = i.lo;
        *hi = i.hi;
    });
}

epsqmc_status epsqmc_simulate_product(double k, double w, double v, uint64_t histories,
                                      uint64_t seed, unsigned workers, epsqmc_estimate* out)
{
    return guard([&] {
        need(out, "out");
        copy(simulate_product(k, w, v, histories, seed, workers), out);
    });
}

epsqmc_status epsqmc_simulate_chain(const double* ks, size_t n_ks, double w, double v,
                                    uint64_t histories, uint64_t seed, unsigned workers,
                                    epsqmc_estimate* out)
{
    return guard([&] {
        need(out, "out");
        if (n_ks > 0)
        {
            need(ks, "ks");
        }
        ChainSpec spec{std::vector<double>(ks, ks + n_ks), w, v};
        copy(simulate_chain(spec, histories, seed, workers), out);
    });
}

epsqmc_status epsqmc_simulate_cancellation(double k, double w, double v, uint64_t histories,
                                           uint64_t seed, unsigned workers, epsqmc_estimate* out)
{
    return guard([&] {
        need(out, "out");
        copy(simulate_cancellation(k, w, v, histories, seed, workers).total, out);
    });
}

epsqmc_status epsqmc_airy_ai(double z, double* out)
{
    return guard([&] {
        need(out, "out");
        *out = airy_ai(z);
    });
}

epsqmc_status epsqmc_phase_series(double u, double w, const double* coeffs, size_t n_coeffs,
                                  double* out)
{
    return guard([&] {
        need(out, "out");
        *out = phase_series(u, w, potential_of(coeffs, n_coeffs));
    });
}

epsqmc_status epsqmc_kernel_value(double y, double u, const double* coeffs, size_t n_coeffs,
                                  double* out)
{
    return guard([&] {
        need(out, "out");
        *out = kernel_value(y, u, potential_of(coeffs, n_coeffs), KernelSpec{});
    });
}

epsqmc_status epsqmc_langevin_step(double u_now, double u_prev, double y, const double* coeffs,
                                   size_t n_coeffs, double* out)
{
    return guard([&] {
        need(out, "out");
        *out = langevin_step(u_now, u_prev, y, potential_of(coeffs, n_coeffs));
    });
}

epsqmc_status epsqmc_noise_for_target(double u_target, double u_now, double u_prev,
                                      const double* coeffs, size_t n_coeffs, double* out)
{
    return guard([&] {
        need(out, "out");
        *out = noise_for_target(u_target, u_now, u_prev, potential_of(coeffs, n_coeffs));
    });
}

//---------------------------------------------------------------------------//
epsqmc_status epsqmc_job_parse(const char* text, const char* base_dir, epsqmc_job** out)
{
    return guard([&] {
        need(text, "text");
        need(out, "out");
        *out = nullptr;
        auto job = new epsqmc_job{parse_config(text, base_dir ? base_dir : "."), {}, {}, {}};
        if (job->config.subcommand)
        {
            job->subcommand = to_string(*job->config.subcommand);
        }
        *out = job;
    });
}

epsqmc_status epsqmc_job_load(const char* path, epsqmc_job** out)
{
    return guard([&] {
        need(path, "path");
        need(out, "out");
        *out = nullptr;
        auto job = new epsqmc_job{load_config(path), {}, {}, {}};
        if (job->config.subcommand)
        {
            job->subcommand = to_string(*job->config.subcommand);
        }
        *out = job;
    });
}

void epsqmc_job_free(epsqmc_job* job)
{
    delete job;
}

const char* epsqmc_job_subcommand(const epsqmc_job* job)
{
    return job && !job->subcommand.empty() ? job->subcommand.c_str() : nullptr;
}

epsqmc_status epsqmc_job_set_seed(epsqmc_job* job, uint64_t seed)
{
    return guard([&] {
        need(job, "job");
        job->options.seed = seed;
    });
}

epsqmc_status epsqmc_job_set_output(epsqmc_job* job, const char* dir)
{
    return guard([&] {
        need(job, "job");
        need(dir, "dir");
        job->options.output_dir = dir;
    });
}

epsqmc_status epsqmc_job_set_force(epsqmc_job* job, int force)
{
    return guard([&] {
        need(job, "job");
        job->options.force = force != 0;
    });
}

epsqmc_status epsqmc_job_set_workers(epsqmc_job* job, unsigned workers)
{
    return guard([&] {
        need(job, "job");
        job->options.workers = workers;
    });
}

epsqmc_status epsqmc_job_set_inputs(epsqmc_job* job, const char* const* paths, size_t n)
{
    return guard([&] {
        need(job, "job");
        if (n > 0)
        {
            need(paths, "paths");
        }
        std::vector<std::string> inputs;
        for (size_t i = 0; i < n; ++i)
        {
            need(paths[i], "paths[i]");
            inputs.emplace_back(paths[i]);
        }
        job->config.compare_inputs = std::move(inputs);
    });
}

const char* epsqmc_job_echo(epsqmc_job* job)
{
    if (!job)
    {
        return nullptr;
    }
    job->echo = echo_config(job->config);
    return job->echo.c_str();
}

epsqmc_status epsqmc_job_run(epsqmc_job* job, const char* subcommand, epsqmc_result** out)
{
    return guard([&] {
        need(job, "job");
        need(subcommand, "subcommand");
        need(out, "out");
        *out = nullptr;
        JobOutcome outcome = run_job(job->config, parse_subcommand(subcommand), job->options);
        *out = new epsqmc_result{std::move(outcome)};
    });
}

void epsqmc_result_free(epsqmc_result* result)
{
    delete result;
}

const char* epsqmc_result_summary(const epsqmc_result* result)
{
    return result ? result->outcome.summary.c_str() : nullptr;
}

size_t epsqmc_result_file_count(const epsqmc_result* result)
{
    return result ? result->outcome.files.size() : 0;
}

const char* epsqmc_result_file(const epsqmc_result* result, size_t i)
{
    if (!result || i >= result->outcome.files.size())
    {
        return nullptr;
    }
    return result->outcome.files[i].c_str();
}

size_t epsqmc_result_bins(const epsqmc_result* result)
{
    return result && result->outcome.result ? result->outcome.result->size() : 0;
}

epsqmc_status epsqmc_result_get(const epsqmc_result* result, size_t bin, double* center,
                                uint64_t* h0, uint64_t* h1, double* q_hat, double* std_error)
{
    return guard([&] {
        need(result, "result");
        if (bin >= epsqmc_result_bins(result))
        {
            throw ValidationError("bin " + std::to_string(bin) + " out of range");
        }
        const ResultTable& t = *result->outcome.result;
        if (center) *center = t.bin_center[bin];
        if (h0) *h0 = t.h0[bin];
        if (h1) *h1 = t.h1[bin];
        if (q_hat) *q_hat = t.q_hat[bin];
        if (std_error) *std_error = t.std_error[bin];
    });
}

}  // extern "C"
