// SPDX-License-Identifier: Apache-2.0
// Command-line front end; talks to the library only through the C API.
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "epsqmc/epsqmc.h"

namespace
{

const std::vector<std::string> kSubcommands = {"demo-eps",  "sample",    "oracle",
                                               "amplitude", "reference", "compare"};

bool is_subcommand(const std::string& s)
{
    for (const auto& name : kSubcommands)
    {
        if (s == name)
        {
            return true;
        }
    }
    return false;
}

int report(epsqmc_status status)
{
    const char* kind = status == EPSQMC_VALIDATION ? "invalid input"
                       : status == EPSQMC_NUMERICAL ? "numerical diagnostic failed"
                                                    : "internal error";
    std::fprintf(stderr, "epsqmc: %s: %s\n", kind, epsqmc_last_error());
    return static_cast<int>(status);
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Signed-measure Monte Carlo for lattice quantum dynamics", "epsqmc"};
    app.set_version_flag("--version", std::string(epsqmc_version()));
    app.footer("subcommands: demo-eps, sample, oracle, amplitude, reference, compare\n"
               "The subcommand may instead be given as \"subcommand\" in the config.\n"
               "EPSQMC_MAX_WORKERS caps the number of worker threads.\n"
               "exit codes: 0 success, 1 invalid input, 2 numerical diagnostic failed");

    std::vector<std::string> args;
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    unsigned workers = 0;
    bool force = false;
    bool echo = false;
    app.add_option("args", args, "subcommand, then result files for compare");
    app.add_option("-c,--config", config_path, "JSON config file");
    auto* seed_opt = app.add_option("--seed", seed, "RNG seed, overrides the config");
    app.add_option("--out", out_dir, "output directory, overrides the config");
    app.add_flag("--force", force, "run sample even when the variance estimate is infeasible");
    app.add_option("--workers", workers, "worker threads (0: all cores)");
    app.add_flag("--echo-config", echo, "print the config with every default filled in");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    std::string subcommand;
    std::vector<std::string> inputs = args;
    if (!inputs.empty() && is_subcommand(inputs.front()))
    {
        subcommand = inputs.front();
        inputs.erase(inputs.begin());
    }

    epsqmc_job* job = nullptr;
    epsqmc_status st = config_path.empty() ? epsqmc_job_parse("{}", ".", &job)
                                           : epsqmc_job_load(config_path.c_str(), &job);
    if (st != EPSQMC_OK)
    {
        return report(st);
    }
    if (subcommand.empty() && epsqmc_job_subcommand(job))
    {
        subcommand = epsqmc_job_subcommand(job);
    }
    if (echo)
    {
        std::fputs(epsqmc_job_echo(job), stdout);
        epsqmc_job_free(job);
        return 0;
    }
    if (subcommand.empty())
    {
        std::fprintf(stderr, "epsqmc: invalid input: no subcommand given (%s)\n",
                     args.empty() ? "none on the command line or in the config"
                                  : ("unknown \"" + args.front() + "\"").c_str());
        epsqmc_job_free(job);
        return 1;
    }
    if (!inputs.empty() && subcommand != "compare")
    {
        std::fprintf(stderr, "epsqmc: invalid input: unexpected argument \"%s\"\n", inputs.front().c_str());
        epsqmc_job_free(job);
        return 1;
    }

    std::vector<const char*> raw;
    for (const auto& s : inputs)
    {
        raw.push_back(s.c_str());
    }
    if (!raw.empty())
    {
        st = epsqmc_job_set_inputs(job, raw.data(), raw.size());
    }
    if (st == EPSQMC_OK && *seed_opt)
    {
        st = epsqmc_job_set_seed(job, seed);
    }
    if (st == EPSQMC_OK && !out_dir.empty())
    {
        st = epsqmc_job_set_output(job, out_dir.c_str());
    }
    if (st == EPSQMC_OK)
    {
        st = epsqmc_job_set_force(job, force ? 1 : 0);
    }
    if (st == EPSQMC_OK)
    {
        st = epsqmc_job_set_workers(job, workers);
    }
    epsqmc_result* result = nullptr;
    if (st == EPSQMC_OK)
    {
        st = epsqmc_job_run(job, subcommand.c_str(), &result);
    }
    epsqmc_job_free(job);
    if (st != EPSQMC_OK)
    {
        return report(st);
    }
    std::fputs(epsqmc_result_summary(result), stdout);
    epsqmc_result_free(result);
    return 0;
}
