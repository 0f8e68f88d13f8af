// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <string>

#include "epsqmc/error.hpp"
#include "epsqmc/job.hpp"
#include "json.hpp"

using namespace epsqmc;
namespace fs = std::filesystem;

namespace
{

const char* kMinimal = R"({
  "lattice": {"n_slices": 3, "n_points": 9, "u_min": -2, "u_max": 2},
  "potential": {"coefficients": [0, 0, 0.5, 0, 0.1]},
  "psi0": {"family": "gaussian", "center": 0.3, "width": 0.7}
})";

std::string with(const std::string& extra)
{
    std::string s = kMinimal;
    s.insert(s.rfind('}'), "," + extra);
    return s;
}

fs::path scratch(const std::string& name)
{
    fs::path p = fs::temp_directory_path() / ("epsqmc_test_job_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string error_of(const std::string& text, std::optional<Subcommand> sub = std::nullopt)
{
    try
    {
        JobConfig c = parse_config(text);
        if (sub)
        {
            c.validate_for(*sub);
        }
    }
    catch (const ValidationError& e)
    {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("minimal config gets every default")
{
    JobConfig c = parse_config(kMinimal);
    c.validate_for(Subcommand::sample);
    CHECK(c.v == 0.5);
    CHECK(c.strategy == SamplerStrategy::uniform);
    CHECK(c.kernel.strategy == KernelStrategy::automatic);
    CHECK(c.histories == 100000);
    CHECK(c.lattice.epsilon == 1.0);

    auto echo = nlohmann::json::parse(echo_config(c));
    CHECK(echo["run"]["v"] == 0.5);
    CHECK(echo["run"]["strategy"] == "uniform");
    CHECK(echo["kernel"]["strategy"] == to_string(KernelStrategy::automatic));
    CHECK(echo["lattice"]["hbar"] == 1.0);
    CHECK(echo["reference"]["total_time"] == 3.0);
}

TEST_CASE("echoed config parses back to the same config")
{
    JobConfig c = parse_config(with(R"("run": {"v": 0.4, "seed": 9, "strategy": "importance"},
                                       "kernel": {"tolerance": 1e-9}, "eps": {"ks": [0.5, -0.2]})"));
    std::string once = echo_config(c);
    CHECK(echo_config(parse_config(once)) == once);

    JobConfig sliced = parse_config(R"({"lattice": {"n_slices": 2, "n_points": 5, "u_min": -1, "u_max": 1},
        "potential": {"slices": [[0, 0, 0.5], [0, 0, 0.5, 0.2]], "units": "physical"},
        "psi0": {"family": "ho_eigenstate", "n": 1}})");
    sliced.validate_for(Subcommand::oracle);
    CHECK(sliced.physical_units);
    CHECK(echo_config(parse_config(echo_config(sliced))) == echo_config(sliced));
}

TEST_CASE("config errors name the offending key or bound")
{
    CHECK(error_of(with(R"("run": {"vv": 0.5})")).find("unknown key \"vv\"") != std::string::npos);
    CHECK(error_of(with(R"("extra": 1)")).find("unknown key \"extra\"") != std::string::npos);
    CHECK(error_of(with(R"("run": {"histories": 0})")) == "histories must be >= 1");
    CHECK(error_of(with(R"("run": {"v": 1.5})")).find("0 < v < 1") != std::string::npos);
    CHECK(error_of(with(R"("run": {"seed": "x"})")).find("run.seed") != std::string::npos);
    CHECK(error_of(R"({"lattice": {"n_slices": 3}})").find("lattice.n_points") != std::string::npos);
    CHECK(error_of("{", std::nullopt).find("not valid JSON") != std::string::npos);
    CHECK(error_of(R"({"potential": {"coefficients": [1], "slices": [[1]]}})").find("exactly one") != std::string::npos);
    CHECK(error_of("{}", Subcommand::sample).find("missing required field \"lattice\"") != std::string::npos);
    CHECK(error_of("{}", Subcommand::compare).find("at least one input") != std::string::npos);
    CHECK(error_of(R"({"psi0": {"family": "box"}})").find("psi0.family") != std::string::npos);
    CHECK(error_of(R"({"eps": {"k": 0.6, "w": 0.4, "v": 0.9}})", Subcommand::demo_eps) != "");
    CHECK(error_of(R"({"subcommand": "simulate"})").find("unknown subcommand") != std::string::npos);
}

TEST_CASE("relative paths resolve against the config directory")
{
    JobConfig c = parse_config(R"({"psi0": {"family": "csv", "path": "psi.csv"},
                                   "output": {"directory": "runs/a"}})",
                               "/data/cfg");
    CHECK(c.psi0.path == "/data/cfg/psi.csv");
    CHECK(c.output_dir == "/data/cfg/runs/a");
}

TEST_CASE("result CSV round-trips losslessly")
{
    ResultTable t;
    t.bin_center = {-1.0, 0.1, 1.0 / 3.0};
    t.h0 = {0, 18446744073709551615ull, 7};
    t.h1 = {1, 2, 3};
    t.q_hat = {1e-300, -0.1, 2.0 / 7.0};
    t.std_error = {0.0, 1e-17, 0.125};
    std::string csv = format_result_csv(t);
    CHECK(csv.rfind("bin_center,h0,h1,Q_hat,stderr\n", 0) == 0);
    CHECK(parse_result_csv(csv) == t);
    CHECK_THROWS_AS(parse_result_csv("a,b\n"), ValidationError);
    CHECK_THROWS_AS(parse_result_csv(std::string(kResultHeader) + "\n1,2,3\n"), ValidationError);
}

TEST_CASE("emit_report")
{
    fs::path dir = scratch("report");
    ResultTable t;
    t.bin_center = {0.0, 1.0};
    t.h0 = {5, 6};
    t.h1 = {1, 1};
    t.q_hat = {0.25, 0.75};
    t.std_error = {0.01, 0.02};
    write_text((dir / "a.csv").string(), format_result_csv(t));
    write_text((dir / "b.csv").string(), format_result_csv(t));

    Report single = emit_report({(dir / "a.csv").string()});
    auto sj = nlohmann::json::parse(single.json);
    CHECK(sj["inputs"].size() == 1);
    CHECK(sj["inputs"][0]["sum_q_hat"] == 1.0);
    CHECK(sj["pairs"].empty());

    Report pair = emit_report({(dir / "a.csv").string(), (dir / "b.csv").string()});
    auto pj = nlohmann::json::parse(pair.json);
    CHECK(pj["pairs"][0]["l2"] == 0.0);
    CHECK(pj["pairs"][0]["max_abs"] == 0.0);
    CHECK(pj["pairs"][0]["fraction_within"] == 1.0);

    t.bin_center.push_back(2.0);
    t.h0.push_back(0);
    t.h1.push_back(0);
    t.q_hat.push_back(0.0);
    t.std_error.push_back(0.0);
    write_text((dir / "c.csv").string(), format_result_csv(t));
    try
    {
        emit_report({(dir / "a.csv").string(), (dir / "c.csv").string()});
        FAIL("expected a binning mismatch");
    }
    catch (const ValidationError& e)
    {
        CHECK(std::string(e.what()).find("binning mismatch") != std::string::npos);
    }
}

TEST_CASE("sample, oracle and compare pipeline")
{
    fs::path dir = scratch("pipeline");
    JobConfig c = parse_config(with(R"("run": {"histories": 1000000, "seed": 5})"));
    JobOptions opt;
    opt.output_dir = (dir / "run").string();
    opt.workers = 2;
    JobOutcome s = run_job(c, Subcommand::sample, opt);
    JobOutcome o = run_job(c, Subcommand::oracle, opt);
    REQUIRE(s.result);
    REQUIRE(o.result);
    CHECK(fs::exists(dir / "run" / "sample.csv"));
    CHECK(fs::exists(dir / "run" / "oracle.json"));
    CHECK(parse_result_csv(read_text((dir / "run" / "sample.csv").string())) == *s.result);

    auto meta = nlohmann::json::parse(read_text((dir / "run" / "sample.json").string()));
    CHECK(meta["seed"] == 5);
    CHECK(meta["version"] == EPSQMC_VERSION);
    CHECK(meta["source"] == "sample");
    CHECK(meta["config"]["run"]["v"] == 0.5);
    CHECK(meta.contains("n_scale"));
    CHECK(nlohmann::json::parse(meta.dump()) == meta);

    JobConfig cc = c;
    cc.compare_inputs = {(dir / "run" / "sample.csv").string(), (dir / "run" / "oracle.csv").string()};
    JobOutcome cmp = run_job(cc, Subcommand::compare, opt);
    auto report = nlohmann::json::parse(read_text((dir / "run" / "report.json").string()));
    CHECK(report["pairs"][0]["fraction_within"].get<double>() >= 0.95);
    CHECK(cmp.summary.find("wall clock") != std::string::npos);

    // the same seed into a fresh directory, with a different worker count
    JobOptions again = opt;
    again.output_dir = (dir / "rerun").string();
    again.workers = 3;
    run_job(c, Subcommand::sample, again);
    for (const char* name : {"sample.csv", "sample.json"})
    {
        CHECK(read_text((dir / "run" / name).string()) == read_text((dir / "rerun" / name).string()));
    }
}

TEST_CASE("sample aborts when the variance estimate is infeasible unless forced")
{
    fs::path dir = scratch("infeasible");
    JobConfig c = parse_config(R"({
      "lattice": {"n_slices": 10, "n_points": 65, "u_min": -4, "u_max": 4},
      "potential": {"coefficients": [0, 0, 0.5, 0, 0.1]},
      "psi0": {"family": "gaussian"},
      "run": {"histories": 10}})");
    JobOptions opt;
    opt.output_dir = dir.string();
    CHECK_THROWS_AS(run_job(c, Subcommand::sample, opt), NumericalError);
    CHECK_FALSE(fs::exists(dir / "sample.csv"));
    opt.force = true;
    CHECK(run_job(c, Subcommand::sample, opt).result.has_value());
}

TEST_CASE("deterministic subcommands and the eps demo")
{
    fs::path dir = scratch("misc");
    JobConfig c = parse_config(R"({
      "lattice": {"n_slices": 2, "n_points": 201, "u_min": -10, "u_max": 10},
      "potential": {"coefficients": [0, 0, 0.5]},
      "psi0": {"family": "ho_eigenstate", "n": 0},
      "reference": {"steps": 400},
      "eps": {"histories": 20000, "ks": [0.5, 0.5]}})");
    JobOptions opt;
    opt.output_dir = dir.string();
    for (auto sub : {Subcommand::amplitude, Subcommand::reference, Subcommand::oracle})
    {
        JobOutcome out = run_job(c, sub, opt);
        REQUIRE(out.result);
        double total = 0;
        for (double q : out.result->q_hat)
        {
            total += q;
        }
        // ground state is stationary; each method conserves probability
        CHECK(total == doctest::Approx(1.0).epsilon(2e-2));
    }
    JobOutcome demo = run_job(c, Subcommand::demo_eps, opt);
    auto j = nlohmann::json::parse(read_text((dir / "demo-eps.json").string()));
    CHECK(j["product"]["exact"].get<double>() == doctest::Approx(0.24));
    CHECK(j["chain"]["exact"].get<double>() == doctest::Approx(0.1));
    CHECK(demo.summary.find("cancellation") != std::string::npos);
}

TEST_CASE("csv initial state")
{
    fs::path dir = scratch("csvpsi");
    std::string rows = "re,im\n";
    for (int i = 0; i < 5; ++i)
    {
        rows += (i == 2 ? "2" : "0") + std::string(",0\n");
    }
    write_text((dir / "psi.csv").string(), rows);
    write_text((dir / "cfg.json").string(), R"({
      "lattice": {"n_slices": 2, "n_points": 5, "u_min": -1, "u_max": 1},
      "potential": {"coefficients": [0, 0, 0.5]},
      "psi0": {"family": "csv", "path": "psi.csv"}})");
    JobConfig c = load_config((dir / "cfg.json").string());
    auto psi = c.initial_state();
    CHECK(psi[2].real() == doctest::Approx(std::sqrt(2.0)));  // sum |psi|^2 du = 1 with du = 0.5

    write_text((dir / "psi.csv").string(), "re,im\n1,0\n");
    CHECK_THROWS_AS(c.initial_state(), ValidationError);
}
