// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
/*!
 * Config-driven jobs: a JSON document describes the lattice, potential,
 * initial state and run parameters; each subcommand writes a result CSV
 * (bin_center,h0,h1,Q_hat,stderr) plus a JSON sidecar into the output
 * directory. Q_hat is always probability mass per bin, so results from
 * different subcommands compare directly.
 */
//---------------------------------------------------------------------------//
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "epsqmc/kernels.hpp"
#include "epsqmc/lattice.hpp"
#include "epsqmc/sampler.hpp"

namespace epsqmc
{

enum class Subcommand
{
    demo_eps,
    sample,
    oracle,
    amplitude,
    reference,
    compare,
};

const char* to_string(Subcommand s);
Subcommand parse_subcommand(const std::string& name);

enum class InitialFamily
{
    gaussian,
    ho_eigenstate,
    csv,
};

struct InitialState
{
    InitialFamily family = InitialFamily::gaussian;
    double center = 0.0;
    double width = 1.0;     //!< gaussian
    double momentum = 0.0;  //!< gaussian
    int level = 0;          //!< ho_eigenstate
    double omega = 1.0;     //!< ho_eigenstate
    std::string path;       //!< csv, resolved against the config directory
};

struct EpsDemoConfig
{
    double k = 0.6;
    double w = 0.4;
    double v = kDefaultReference;
    std::vector<double> ks;
    std::uint64_t histories = 1000000;
};

struct JobConfig
{
    std::optional<Subcommand> subcommand;  //!< the command line may supply it instead

    bool has_lattice = false;
    bool has_potential = false;
    bool has_psi0 = false;

    LatticeSpec lattice;
    std::vector<std::vector<double>> potential;  //!< one shared entry or one per slice
    bool physical_units = false;
    InitialState psi0;

    std::uint64_t histories = 100000;
    std::uint64_t seed = 1;
    double v = kDefaultReference;
    SamplerStrategy strategy = SamplerStrategy::uniform;
    bool force = false;

    KernelSpec kernel;

    int reference_steps = 1000;
    std::optional<double> reference_time;  //!< defaults to n_slices

    EpsDemoConfig eps;

    std::string output_dir = "out";
    bool dump_kernel_table = false;
    bool dump_wigner_table = false;

    std::vector<std::string> compare_inputs;
    double z_limit = 4.0;

    std::string base_dir = ".";  //!< for relative paths; not echoed

    /// Throws ValidationError naming the first missing or out-of-range field.
    void validate_for(Subcommand sub) const;
    /// Nondimensional per-slice potentials.
    SlicePotentials potentials() const;
    RunConfig run_config(unsigned workers) const;
    std::vector<Complex> initial_state() const;
};

/// Parses a JSON config; unknown keys and wrong types are errors.
JobConfig parse_config(const std::string& text, const std::string& base_dir = ".");
JobConfig load_config(const std::string& path);
/// Full config with every default filled in, as JSON text.
std::string echo_config(const JobConfig& config);

struct ResultTable
{
    std::vector<double> bin_center;
    std::vector<std::uint64_t> h0;
    std::vector<std::uint64_t> h1;
    std::vector<double> q_hat;
    std::vector<double> std_error;

    std::size_t size() const { return bin_center.size(); }
    bool operator==(const ResultTable&) const = default;
};

inline constexpr const char* kResultHeader = "bin_center,h0,h1,Q_hat,stderr";

std::string format_result_csv(const ResultTable& table);
ResultTable parse_result_csv(const std::string& text);
void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

struct JobOptions
{
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output_dir;
    bool force = false;
    unsigned workers = 0;  //!< 0: hardware concurrency, capped by EPSQMC_MAX_WORKERS
};

struct JobOutcome
{
    std::vector<std::string> files;  //!< written, in order
    std::string summary;             //!< human-readable, for the terminal
    std::optional<ResultTable> result;
};

JobOutcome run_job(const JobConfig& config, Subcommand sub, const JobOptions& options = {});

struct Report
{
    std::string text;
    std::string json;
};

/// Normalisation per input plus L2 / max / z statistics for every pair.
Report emit_report(const std::vector<std::string>& paths, double z_limit = 4.0);

}  // namespace epsqmc
