// SPDX-License-Identifier: Apache-2.0
#include "epsqmc/job.hpp"

#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "epsqmc/eps.hpp"
#include "epsqmc/error.hpp"
#include "epsqmc/oracle.hpp"
#include "epsqmc/parallel.hpp"

namespace epsqmc
{
namespace
{

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string fmt(double x)
{
    std::ostringstream os;
    os.precision(10);
    os << x;
    return os.str();
}

std::string g17(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void require(bool ok, const std::string& what)
{
    if (!ok)
    {
        throw ValidationError(what);
    }
}

// Reads one JSON object, tracking which keys were consumed so that
// leftovers can be reported as unknown.
class Section
{
  public:
    Section(const Json& node, std::string where) : node_(node), where_(std::move(where))
    {
        require(node_.is_object(), "\"" + where_ + "\" must be an object");
    }

    bool has(const std::string& key) const { return node_.contains(key); }

    template <class T>
    std::optional<T> get(const std::string& key)
    {
        auto it = node_.find(key);
        if (it == node_.end())
        {
            return std::nullopt;
        }
        seen_.insert(key);
        return convert<T>(*it, path(key));
    }

    template <class T>
    T need(const std::string& key)
    {
        auto value = get<T>(key);
        require(value.has_value(), "missing required field \"" + path(key) + "\"");
        return *value;
    }

    const Json& raw(const std::string& key)
    {
        seen_.insert(key);
        return node_.at(key);
    }

    std::string path(const std::string& key) const
    {
        return where_.empty() ? key : where_ + "." + key;
    }

    void finish() const
    {
        for (auto it = node_.begin(); it != node_.end(); ++it)
        {
            require(seen_.count(it.key()) > 0, "unknown key \"" + it.key() + "\""
                                                   + (where_.empty() ? "" : " in \"" + where_ + "\""));
        }
    }

  private:
    template <class T>
    static T convert(const Json& j, const std::string& name)
    {
        if constexpr (std::is_same_v<T, double>)
        {
            require(j.is_number(), "\"" + name + "\" must be a number");
            return j.get<double>();
        }
        else if constexpr (std::is_same_v<T, bool>)
        {
            require(j.is_boolean(), "\"" + name + "\" must be true or false");
            return j.get<bool>();
        }
        else if constexpr (std::is_same_v<T, std::string>)
        {
            require(j.is_string(), "\"" + name + "\" must be a string");
            return j.get<std::string>();
        }
        else if constexpr (std::is_same_v<T, std::int64_t>)
        {
            require(j.is_number_integer(), "\"" + name + "\" must be an integer");
            return j.get<std::int64_t>();
        }
        else if constexpr (std::is_same_v<T, std::vector<double>>)
        {
            require(j.is_array(), "\"" + name + "\" must be an array of numbers");
            std::vector<double> out;
            for (const auto& x : j)
            {
                require(x.is_number(), "\"" + name + "\" must be an array of numbers");
                out.push_back(x.get<double>());
            }
            return out;
        }
        else if constexpr (std::is_same_v<T, std::vector<std::string>>)
        {
            require(j.is_array(), "\"" + name + "\" must be an array of strings");
            std::vector<std::string> out;
            for (const auto& x : j)
            {
                require(x.is_string(), "\"" + name + "\" must be an array of strings");
                out.push_back(x.get<std::string>());
            }
            return out;
        }
    }

    const Json& node_;
    std::string where_;
    std::set<std::string> seen_;
};

int to_int(std::int64_t x, const std::string& name)
{
    require(x >= INT32_MIN && x <= INT32_MAX, "\"" + name + "\" is out of range");
    return static_cast<int>(x);
}

std::uint64_t to_count(std::int64_t x, const std::string& what)
{
    require(x >= 1, what + " must be >= 1");
    return static_cast<std::uint64_t>(x);
}

std::string resolve(const std::string& base, const std::string& path)
{
    fs::path p(path);
    return p.is_absolute() ? path : (fs::path(base) / p).lexically_normal().string();
}

const char* family_name(InitialFamily f)
{
    switch (f)
    {
        case InitialFamily::gaussian: return "gaussian";
        case InitialFamily::ho_eigenstate: return "ho_eigenstate";
        default: return "csv";
    }
}

Json config_json(const JobConfig& c)
{
    Json j;
    if (c.subcommand)
    {
        j["subcommand"] = to_string(*c.subcommand);
    }
    if (c.has_lattice)
    {
        j["lattice"] = {{"n_slices", c.lattice.n_slices}, {"n_points", c.lattice.n_points},
                        {"u_min", c.lattice.u_min},       {"u_max", c.lattice.u_max},
                        {"epsilon", c.lattice.epsilon},   {"mass", c.lattice.mass},
                        {"hbar", c.lattice.hbar}};
    }
    if (c.has_potential)
    {
        Json p;
        if (c.potential.size() == 1)
        {
            p["coefficients"] = c.potential[0];
        }
        else
        {
            p["slices"] = c.potential;
        }
        p["units"] = c.physical_units ? "physical" : "nondimensional";
        j["potential"] = p;
    }
    if (c.has_psi0)
    {
        Json s{{"family", family_name(c.psi0.family)}};
        switch (c.psi0.family)
        {
            case InitialFamily::gaussian:
                s["center"] = c.psi0.center;
                s["width"] = c.psi0.width;
                s["momentum"] = c.psi0.momentum;
                break;
            case InitialFamily::ho_eigenstate:
                s["n"] = c.psi0.level;
                s["omega"] = c.psi0.omega;
                s["center"] = c.psi0.center;
                break;
            case InitialFamily::csv: s["path"] = c.psi0.path; break;
        }
        j["psi0"] = s;
    }
    j["run"] = {{"histories", c.histories}, {"seed", c.seed},
                {"v", c.v},                 {"strategy", to_string(c.strategy)},
                {"force", c.force}};
    const KernelSpec& k = c.kernel;
    j["kernel"] = {{"strategy", to_string(k.strategy)},
                   {"damping", k.damping},
                   {"damping_ratio", k.damping_ratio},
                   {"max_levels", k.max_levels},
                   {"tolerance", k.tolerance},
                   {"w_cutoff", k.w_cutoff},
                   {"quadrature_points", k.quadrature_points},
                   {"weighting", to_string(k.weighting)},
                   {"tail_tolerance", k.tail_tolerance}};
    Json ref{{"steps", c.reference_steps}};
    if (c.reference_time)
    {
        ref["total_time"] = *c.reference_time;
    }
    else if (c.has_lattice)
    {
        ref["total_time"] = static_cast<double>(c.lattice.n_slices);
    }
    j["reference"] = ref;
    j["eps"] = {{"k", c.eps.k},   {"w", c.eps.w},   {"v", c.eps.v},
                {"ks", c.eps.ks}, {"histories", c.eps.histories}};
    j["output"] = {{"directory", c.output_dir},
                   {"kernel_table", c.dump_kernel_table},
                   {"wigner_table", c.dump_wigner_table}};
    j["compare"] = {{"inputs", c.compare_inputs}, {"z_limit", c.z_limit}};
    return j;
}

//---------------------------------------------------------------------------//
Json estimate_json(const Estimate& e)
{
    return {{"value", e.value}, {"stderr", e.std_error}, {"count0", e.count0}, {"count1", e.count1}};
}

Json table_diagnostics(const TransitionTable& t)
{
    const auto& d = t.diagnostics();
    return {{"kernel_strategies", d.strategies}, {"max_abs_weight", d.max_abs_weight},
            {"min_weight", d.min_weight},        {"max_row_abs_mass", d.max_row_abs_mass},
            {"max_leakage", d.max_leakage},      {"mean_leakage", d.mean_leakage},
            {"warnings", d.warnings}};
}

Json wigner_diagnostics(const WignerTable& w)
{
    double lo = 1.0, hi = 0.0;
    for (std::size_t a = 0; a < w.size(); ++a)
    {
        for (std::size_t b = 0; b < w.size(); ++b)
        {
            lo = std::min(lo, w.lambda(a, b));
            hi = std::max(hi, w.lambda(a, b));
        }
    }
    return {{"wigner_total", w.total()},
            {"wigner_scale", w.scale()},
            {"wigner_imaginary_residue", w.imaginary_residue()},
            {"lambda_min", lo},
            {"lambda_max", hi}};
}

Json metadata(const JobConfig& c, Subcommand sub)
{
    Json j;
    j["source"] = to_string(sub);
    j["version"] = EPSQMC_VERSION;
    j["seed"] = c.seed;
    j["config"] = config_json(c);
    // reruns into a different directory must produce identical sidecars
    j["config"]["output"].erase("directory");
    return j;
}

std::string dump(const Json& j)
{
    return j.dump(2) + "\n";
}

double sum(const std::vector<double>& x)
{
    double s = 0.0;
    for (double v : x)
    {
        s += v;
    }
    return s;
}

ResultTable deterministic_table(const LatticeSpec& spec, std::vector<double> mass)
{
    ResultTable t;
    t.bin_center = spec.grid();
    t.h0.assign(mass.size(), 0);
    t.h1.assign(mass.size(), 0);
    t.std_error.assign(mass.size(), 0.0);
    t.q_hat = std::move(mass);
    return t;
}

std::vector<Complex> read_psi_csv(const std::string& path, std::size_t n, double spacing)
{
    std::istringstream in(read_text(path));
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), "initial-state file " + path + " is empty");
    if (!line.empty() && line.back() == '\r')
    {
        line.pop_back();
    }
    require(line == "re,im", "initial-state file " + path + " must start with header \"re,im\"");
    std::vector<Complex> psi;
    while (std::getline(in, line))
    {
        if (line.empty() || line == "\r")
        {
            continue;
        }
        double re = 0, im = 0;
        char tail = 0;
        require(std::sscanf(line.c_str(), "%lf,%lf%c", &re, &im, &tail) >= 2 && (tail == 0 || tail == '\r'),
                "initial-state file " + path + ": malformed row \"" + line + "\"");
        psi.emplace_back(re, im);
    }
    require(psi.size() == n, "initial-state file " + path + " has " + std::to_string(psi.size())
                                 + " rows, grid has " + std::to_string(n) + " points");
    double norm = discrete_norm(psi, spacing);
    require(norm > 0 && std::isfinite(norm), "initial-state file " + path + " has zero or non-finite norm");
    for (auto& x : psi)
    {
        x /= std::sqrt(norm);
    }
    return psi;
}

void dump_kernel_table(const std::string& path, const LatticeSpec& spec, const TransitionTable& t)
{
    std::string out = "slice,u_index,y_index,weight\n";
    for (int slice = 1; slice < spec.n_slices; ++slice)
    {
        for (std::size_t b = 0; b < t.size(); ++b)
        {
            const DiscreteKernel& line = t.line(slice, b);
            for (std::size_t j = 0; j < line.weights.size(); ++j)
            {
                out += std::to_string(slice) + "," + std::to_string(b) + ","
                       + std::to_string(line.offset + j) + "," + g17(line.weights[j]) + "\n";
            }
        }
    }
    write_text(path, out);
}

void dump_wigner_table(const std::string& path, const LatticeSpec& spec, const WignerTable& w)
{
    std::string out = "u0,u1,value,lambda\n";
    for (std::size_t a = 0; a < w.size(); ++a)
    {
        for (std::size_t b = 0; b < w.size(); ++b)
        {
            out += g17(spec.point(a)) + "," + g17(spec.point(b)) + "," + g17(w.value(a, b)) + ","
                   + g17(w.lambda(a, b)) + "\n";
        }
    }
    write_text(path, out);
}

}  // namespace

//---------------------------------------------------------------------------//
const char* to_string(Subcommand s)
{
    switch (s)
    {
        case Subcommand::demo_eps: return "demo-eps";
        case Subcommand::sample: return "sample";
        case Subcommand::oracle: return "oracle";
        case Subcommand::amplitude: return "amplitude";
        case Subcommand::reference: return "reference";
        default: return "compare";
    }
}

Subcommand parse_subcommand(const std::string& name)
{
    for (auto s : {Subcommand::demo_eps, Subcommand::sample, Subcommand::oracle,
                   Subcommand::amplitude, Subcommand::reference, Subcommand::compare})
    {
        if (name == to_string(s))
        {
            return s;
        }
    }
    throw ValidationError("unknown subcommand \"" + name
                          + "\" (expected demo-eps, sample, oracle, amplitude, reference or compare)");
}

JobConfig parse_config(const std::string& text, const std::string& base_dir)
{
    Json doc;
    try
    {
        doc = Json::parse(text);
    }
    catch (const nlohmann::json::parse_error& e)
    {
        throw ValidationError(std::string("config is not valid JSON: ") + e.what());
    }
    JobConfig c;
    c.base_dir = base_dir;
    Section top(doc, "");
    if (auto s = top.get<std::string>("subcommand"))
    {
        c.subcommand = parse_subcommand(*s);
    }
    if (top.has("lattice"))
    {
        Section s(top.raw("lattice"), "lattice");
        c.has_lattice = true;
        c.lattice.n_slices = to_int(s.need<std::int64_t>("n_slices"), "lattice.n_slices");
        c.lattice.n_points = to_int(s.need<std::int64_t>("n_points"), "lattice.n_points");
        c.lattice.u_min = s.need<double>("u_min");
        c.lattice.u_max = s.need<double>("u_max");
        c.lattice.epsilon = s.get<double>("epsilon").value_or(1.0);
        c.lattice.mass = s.get<double>("mass").value_or(1.0);
        c.lattice.hbar = s.get<double>("hbar").value_or(1.0);
        s.finish();
        c.lattice.validate();
    }
    if (top.has("potential"))
    {
        Section s(top.raw("potential"), "potential");
        c.has_potential = true;
        auto coeffs = s.get<std::vector<double>>("coefficients");
        bool sliced = s.has("slices");
        require(coeffs.has_value() != sliced,
                "potential needs exactly one of \"coefficients\" or \"slices\"");
        if (coeffs)
        {
            c.potential = {*coeffs};
        }
        else
        {
            const Json& slices = s.raw("slices");
            require(slices.is_array() && !slices.empty(),
                    "\"potential.slices\" must be a non-empty array of coefficient arrays");
            for (std::size_t i = 0; i < slices.size(); ++i)
            {
                Json wrap{{"c", slices[i]}};
                Section one(wrap, "potential.slices[" + std::to_string(i) + "]");
                c.potential.push_back(one.need<std::vector<double>>("c"));
            }
        }
        std::string units = s.get<std::string>("units").value_or("nondimensional");
        require(units == "nondimensional" || units == "physical",
                "potential.units must be \"nondimensional\" or \"physical\", got \"" + units + "\"");
        c.physical_units = units == "physical";
        s.finish();
    }
    if (top.has("psi0"))
    {
        Section s(top.raw("psi0"), "psi0");
        c.has_psi0 = true;
        std::string family = s.need<std::string>("family");
        if (family == "gaussian")
        {
            c.psi0.family = InitialFamily::gaussian;
            c.psi0.center = s.get<double>("center").value_or(0.0);
            c.psi0.width = s.get<double>("width").value_or(1.0);
            c.psi0.momentum = s.get<double>("momentum").value_or(0.0);
            require(c.psi0.width > 0, "psi0.width = " + fmt(c.psi0.width) + " must be > 0");
        }
        else if (family == "ho_eigenstate")
        {
            c.psi0.family = InitialFamily::ho_eigenstate;
            c.psi0.level = to_int(s.get<std::int64_t>("n").value_or(0), "psi0.n");
            c.psi0.omega = s.get<double>("omega").value_or(1.0);
            c.psi0.center = s.get<double>("center").value_or(0.0);
            require(c.psi0.level >= 0, "psi0.n = " + std::to_string(c.psi0.level) + " must be >= 0");
            require(c.psi0.omega > 0, "psi0.omega = " + fmt(c.psi0.omega) + " must be > 0");
        }
        else if (family == "csv")
        {
            c.psi0.family = InitialFamily::csv;
            c.psi0.path = resolve(base_dir, s.need<std::string>("path"));
        }
        else
        {
            throw ValidationError("psi0.family must be gaussian, ho_eigenstate or csv, got \"" + family + "\"");
        }
        s.finish();
    }
    if (top.has("run"))
    {
        Section s(top.raw("run"), "run");
        if (auto h = s.get<std::int64_t>("histories"))
        {
            c.histories = to_count(*h, "histories");
        }
        if (auto seed = s.get<std::int64_t>("seed"))
        {
            require(*seed >= 0, "run.seed must be >= 0");
            c.seed = static_cast<std::uint64_t>(*seed);
        }
        c.v = s.get<double>("v").value_or(c.v);
        if (auto st = s.get<std::string>("strategy"))
        {
            c.strategy = parse_sampler_strategy(*st);
        }
        c.force = s.get<bool>("force").value_or(false);
        s.finish();
        require(c.v > 0 && c.v < 1, "run.v = " + fmt(c.v) + " violates 0 < v < 1");
    }
    if (top.has("kernel"))
    {
        Section s(top.raw("kernel"), "kernel");
        KernelSpec& k = c.kernel;
        if (auto st = s.get<std::string>("strategy"))
        {
            k.strategy = parse_kernel_strategy(*st);
        }
        k.damping = s.get<double>("damping").value_or(k.damping);
        k.damping_ratio = s.get<double>("damping_ratio").value_or(k.damping_ratio);
        if (auto levels = s.get<std::int64_t>("max_levels"))
        {
            k.max_levels = to_int(*levels, "kernel.max_levels");
        }
        k.tolerance = s.get<double>("tolerance").value_or(k.tolerance);
        k.w_cutoff = s.get<double>("w_cutoff").value_or(k.w_cutoff);
        if (auto pts = s.get<std::int64_t>("quadrature_points"))
        {
            k.quadrature_points = to_int(*pts, "kernel.quadrature_points");
        }
        if (auto w = s.get<std::string>("weighting"))
        {
            k.weighting = parse_row_weighting(*w);
        }
        k.tail_tolerance = s.get<double>("tail_tolerance").value_or(k.tail_tolerance);
        s.finish();
        k.validate();
    }
    if (top.has("reference"))
    {
        Section s(top.raw("reference"), "reference");
        if (auto steps = s.get<std::int64_t>("steps"))
        {
            c.reference_steps = to_int(*steps, "reference.steps");
        }
        c.reference_time = s.get<double>("total_time");
        s.finish();
        require(c.reference_steps >= 1, "reference.steps must be >= 1");
        require(!c.reference_time || *c.reference_time >= 0, "reference.total_time must be >= 0");
    }
    if (top.has("eps"))
    {
        Section s(top.raw("eps"), "eps");
        c.eps.k = s.get<double>("k").value_or(c.eps.k);
        c.eps.w = s.get<double>("w").value_or(c.eps.w);
        c.eps.v = s.get<double>("v").value_or(c.eps.v);
        c.eps.ks = s.get<std::vector<double>>("ks").value_or(c.eps.ks);
        if (auto h = s.get<std::int64_t>("histories"))
        {
            c.eps.histories = to_count(*h, "histories");
        }
        s.finish();
    }
    if (top.has("output"))
    {
        Section s(top.raw("output"), "output");
        if (auto dir = s.get<std::string>("directory"))
        {
            c.output_dir = resolve(base_dir, *dir);
        }
        c.dump_kernel_table = s.get<bool>("kernel_table").value_or(false);
        c.dump_wigner_table = s.get<bool>("wigner_table").value_or(false);
        s.finish();
    }
    if (top.has("compare"))
    {
        Section s(top.raw("compare"), "compare");
        for (const auto& p : s.get<std::vector<std::string>>("inputs").value_or(std::vector<std::string>{}))
        {
            c.compare_inputs.push_back(resolve(base_dir, p));
        }
        c.z_limit = s.get<double>("z_limit").value_or(c.z_limit);
        s.finish();
        require(c.z_limit > 0, "compare.z_limit must be > 0");
    }
    top.finish();
    return c;
}

JobConfig load_config(const std::string& path)
{
    std::string base = fs::path(path).parent_path().string();
    return parse_config(read_text(path), base.empty() ? "." : base);
}

std::string echo_config(const JobConfig& config)
{
    return dump(config_json(config));
}

void JobConfig::validate_for(Subcommand sub) const
{
    switch (sub)
    {
        case Subcommand::demo_eps:
        {
            require(eps.histories >= 1, "histories must be >= 1");
            ChainSpec{{eps.k}, eps.w, eps.v}.validate();
            ChainSpec{{eps.k}, -eps.w, eps.v}.validate();
            if (!eps.ks.empty())
            {
                ChainSpec{eps.ks, eps.w, eps.v}.validate();
            }
            return;
        }
        case Subcommand::compare:
            require(!compare_inputs.empty(), "compare needs at least one input file");
            return;
        default: break;
    }
    require(has_lattice, "missing required field \"lattice\"");
    require(has_potential, "missing required field \"potential\"");
    require(has_psi0, "missing required field \"psi0\"");
    lattice.validate();
    require(potential.size() == 1 || potential.size() == static_cast<std::size_t>(lattice.n_slices),
            "potential.slices has " + std::to_string(potential.size()) + " entries, expected "
                + std::to_string(lattice.n_slices) + " (one per slice)");
    run_config(1).validate();
    if (psi0.family == InitialFamily::csv)
    {
        require(fs::exists(psi0.path), "initial-state file " + psi0.path + " does not exist");
    }
}

SlicePotentials JobConfig::potentials() const
{
    std::vector<Potential> slices;
    for (const auto& coeffs : potential)
    {
        Potential p(coeffs);
        slices.push_back(physical_units ? nondimensionalize(p, lattice) : p);
    }
    if (slices.size() == 1)
    {
        return SlicePotentials(slices[0]);
    }
    return SlicePotentials(std::move(slices));
}

RunConfig JobConfig::run_config(unsigned workers) const
{
    RunConfig r;
    r.histories = histories;
    r.seed = seed;
    r.v = v;
    r.strategy = strategy;
    r.lattice = lattice;
    r.potentials = potentials();
    r.kernel = kernel;
    r.workers = workers;
    return r;
}

std::vector<Complex> JobConfig::initial_state() const
{
    switch (psi0.family)
    {
        case InitialFamily::gaussian: return gaussian_state(lattice, psi0.center, psi0.width, psi0.momentum);
        case InitialFamily::ho_eigenstate: return oscillator_state(lattice, psi0.level, psi0.omega, psi0.center);
        default: return read_psi_csv(psi0.path, static_cast<std::size_t>(lattice.n_points), lattice.spacing());
    }
}

//---------------------------------------------------------------------------//
std::string format_result_csv(const ResultTable& t)
{
    std::string out = std::string(kResultHeader) + "\n";
    for (std::size_t i = 0; i < t.size(); ++i)
    {
        out += g17(t.bin_center[i]) + "," + std::to_string(t.h0[i]) + "," + std::to_string(t.h1[i]) + ","
               + g17(t.q_hat[i]) + "," + g17(t.std_error[i]) + "\n";
    }
    return out;
}

ResultTable parse_result_csv(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    if (!line.empty() && line.back() == '\r')
    {
        line.pop_back();
    }
    require(line == kResultHeader, "result file must start with header \"" + std::string(kResultHeader) + "\"");
    ResultTable t;
    int row = 1;
    while (std::getline(in, line))
    {
        ++row;
        if (!line.empty() && line.back() == '\r')
        {
            line.pop_back();
        }
        if (line.empty())
        {
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
        {
            cells.push_back(cell);
        }
        require(cells.size() == 5, "result row " + std::to_string(row) + " has "
                                       + std::to_string(cells.size()) + " columns, expected 5");
        auto real = [&](const std::string& s) {
            char* end = nullptr;
            double x = std::strtod(s.c_str(), &end);
            require(!s.empty() && *end == 0, "result row " + std::to_string(row) + ": bad number \"" + s + "\"");
            return x;
        };
        auto count = [&](const std::string& s) {
            char* end = nullptr;
            unsigned long long x = std::strtoull(s.c_str(), &end, 10);
            require(!s.empty() && s[0] != '-' && *end == 0,
                    "result row " + std::to_string(row) + ": bad count \"" + s + "\"");
            return static_cast<std::uint64_t>(x);
        };
        t.bin_center.push_back(real(cells[0]));
        t.h0.push_back(count(cells[1]));
        t.h1.push_back(count(cells[2]));
        t.q_hat.push_back(real(cells[3]));
        t.std_error.push_back(real(cells[4]));
    }
    return t;
}

void write_text(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    require(static_cast<bool>(out), "cannot write " + path);
    out << text;
    require(static_cast<bool>(out), "failed writing " + path);
}

std::string read_text(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), "cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

//---------------------------------------------------------------------------//
Report emit_report(const std::vector<std::string>& paths, double z_limit)
{
    require(!paths.empty(), "report needs at least one result file");
    std::vector<ResultTable> tables;
    for (const auto& p : paths)
    {
        tables.push_back(parse_result_csv(read_text(p)));
    }
    for (std::size_t i = 1; i < tables.size(); ++i)
    {
        bool same = tables[i].size() == tables[0].size();
        for (std::size_t b = 0; same && b < tables[0].size(); ++b)
        {
            double scale = std::max(1.0, std::abs(tables[0].bin_center[b]));
            same = std::abs(tables[i].bin_center[b] - tables[0].bin_center[b]) <= 1e-12 * scale;
        }
        require(same, "binning mismatch between " + paths[0] + " (" + std::to_string(tables[0].size())
                          + " bins) and " + paths[i] + " (" + std::to_string(tables[i].size()) + " bins)");
    }

    Json j;
    j["z_limit"] = z_limit;
    std::ostringstream text;
    text.precision(6);
    text << "inputs\n";
    Json inputs = Json::array();
    for (std::size_t i = 0; i < tables.size(); ++i)
    {
        double var = 0.0;
        for (double e : tables[i].std_error)
        {
            var += e * e;
        }
        double total = sum(tables[i].q_hat);
        inputs.push_back({{"path", paths[i]},
                          {"bins", tables[i].size()},
                          {"sum_q_hat", total},
                          {"sum_q_hat_stderr", std::sqrt(var)}});
        text << "  " << paths[i] << ": " << tables[i].size() << " bins, sum Q_hat = " << total
             << " +- " << std::sqrt(var) << "\n";
    }
    j["inputs"] = inputs;
    Json pairs = Json::array();
    if (tables.size() > 1)
    {
        text << "pairs\n";
    }
    for (std::size_t a = 0; a < tables.size(); ++a)
    {
        for (std::size_t b = a + 1; b < tables.size(); ++b)
        {
            std::vector<double> err(tables[a].size());
            bool any = false;
            for (std::size_t i = 0; i < err.size(); ++i)
            {
                err[i] = std::hypot(tables[a].std_error[i], tables[b].std_error[i]);
                any = any || err[i] > 0;
            }
            CompareReport r = any ? compare(tables[a].q_hat, tables[b].q_hat, std::span<const double>(err), z_limit)
                                  : compare(tables[a].q_hat, tables[b].q_hat);
            Json pj{{"a", paths[a]}, {"b", paths[b]}, {"l2", r.l2}, {"max_abs", r.max_abs}};
            text << "  " << paths[a] << " vs " << paths[b] << ": L2 = " << r.l2 << ", max |diff| = " << r.max_abs;
            if (r.has_z)
            {
                double max_z = 0.0;
                for (double z : r.z)
                {
                    max_z = std::max(max_z, std::abs(z));
                }
                pj["fraction_within"] = r.fraction_within;
                // infinite z (zero error, nonzero difference) is not valid JSON
                pj["max_abs_z"] = std::isfinite(max_z) ? Json(max_z) : Json("inf");
                text << ", |z| <= " << z_limit << " in " << 100.0 * r.fraction_within << "% of bins"
                     << ", max |z| = " << max_z;
            }
            text << "\n";
            pairs.push_back(pj);
        }
    }
    j["pairs"] = pairs;
    return {text.str(), dump(j)};
}

//---------------------------------------------------------------------------//
JobOutcome run_job(const JobConfig& config, Subcommand sub, const JobOptions& options)
{
    JobConfig c = config;
    c.subcommand = sub;
    if (options.seed)
    {
        c.seed = *options.seed;
    }
    if (options.output_dir)
    {
        c.output_dir = *options.output_dir;
    }
    c.force = c.force || options.force;
    c.validate_for(sub);
    const unsigned workers = resolve_workers(options.workers);

    std::error_code ec;
    fs::create_directories(c.output_dir, ec);
    require(!ec && fs::is_directory(c.output_dir), "cannot create output directory " + c.output_dir);
    auto out_path = [&](const std::string& name) { return (fs::path(c.output_dir) / name).string(); };

    JobOutcome outcome;
    auto emit = [&](const std::string& name, const std::string& text) {
        std::string path = out_path(name);
        write_text(path, text);
        outcome.files.push_back(path);
    };
    std::ostringstream summary;
    summary.precision(6);
    const auto start = std::chrono::steady_clock::now();

    Json meta = metadata(c, sub);
    switch (sub)
    {
        case Subcommand::demo_eps:
        {
            const auto& e = c.eps;
            Estimate prod = simulate_product(e.k, e.w, e.v, e.histories, c.seed, workers);
            CancellationEstimate canc = simulate_cancellation(e.k, e.w, e.v, e.histories, c.seed + 1, workers);
            meta["product"] = estimate_json(prod);
            meta["product"]["exact"] = e.k * e.w;
            summary << "product     k*w = " << e.k * e.w << ": estimate " << prod.value << " +- "
                    << prod.std_error << "\n";
            if (!e.ks.empty())
            {
                Estimate chain = simulate_chain({e.ks, e.w, e.v}, e.histories, c.seed + 2, workers);
                double exact = e.w;
                for (double k : e.ks)
                {
                    exact *= k;
                }
                meta["chain"] = estimate_json(chain);
                meta["chain"]["exact"] = exact;
                summary << "chain       prod(k)*w = " << exact << ": estimate " << chain.value << " +- "
                        << chain.std_error << "\n";
            }
            meta["cancellation"] = estimate_json(canc.total);
            meta["cancellation"]["exact"] = 0.0;
            meta["cancellation"]["branches"] = {{"plus0", canc.plus0},
                                                {"plus1", canc.plus1},
                                                {"minus0", canc.minus0},
                                                {"minus1", canc.minus1}};
            summary << "cancellation 0: estimate " << canc.total.value << " +- " << canc.total.std_error << "\n";
            emit("demo-eps.json", dump(meta));
            break;
        }
        case Subcommand::sample:
        case Subcommand::oracle:
        {
            RunConfig rc = c.run_config(workers);
            SlicePotentials pots = rc.potentials;
            auto psi = c.initial_state();
            WignerTable wigner = wigner_init(psi, pots.at(0), c.lattice, c.v, workers);
            TransitionTable table(c.lattice, pots, c.kernel, workers);
            Json diag = table_diagnostics(table);
            Json wdiag = wigner_diagnostics(wigner);
            for (auto it = wdiag.begin(); it != wdiag.end(); ++it)
            {
                diag[it.key()] = it.value();
            }
            ResultTable result;
            if (sub == Subcommand::sample)
            {
                table.check_reference(c.v);
                CostEstimate cost = estimate_cost(rc, wigner, table);
                if (!cost.feasible && !c.force)
                {
                    throw NumericalError("predicted relative standard error " + fmt(cost.predicted_relative_stderr)
                                             + " exceeds 100% (n_scale " + fmt(cost.n_scale) + ", "
                                             + std::to_string(c.histories)
                                             + " histories); add histories or rerun with --force",
                                         cost.predicted_relative_stderr);
                }
                RunResult r = run(rc, wigner, table);
                result = {r.bin_center, r.h0, r.h1, r.q_hat, r.std_error};
                meta["histories"] = r.histories;
                meta["n_scale"] = r.n_scale;
                meta["n_scale_formula"] = c.strategy == SamplerStrategy::uniform
                                              ? "N^2 * N^(n-1) / c"
                                              : "N^2 * B^(n-1) / c, B = max row sum |k|";
                diag["predicted_relative_stderr"] = cost.predicted_relative_stderr;
                diag["runtime_class"] = cost.runtime_class;
                diag["warnings"] = r.diagnostics.warnings;
                summary << "sample: " << r.histories << " histories, n_scale " << r.n_scale
                        << ", predicted relative stderr " << cost.predicted_relative_stderr << "\n";
            }
            else
            {
                result = deterministic_table(c.lattice, transfer_path_sum(c.lattice, table, wigner, workers));
                summary << "oracle: exact transfer path sum over " << c.lattice.n_points << "^2 pairs, "
                        << c.lattice.n_slices - 1 << " chained steps\n";
            }
            meta["diagnostics"] = diag;
            summary << "sum Q_hat = " << sum(result.q_hat) << ", max row leakage "
                    << table.diagnostics().max_leakage << "\n";
            for (const auto& w : table.diagnostics().warnings)
            {
                summary << "warning: " << w << "\n";
            }
            std::string stem = to_string(sub);
            emit(stem + ".csv", format_result_csv(result));
            emit(stem + ".json", dump(meta));
            if (c.dump_kernel_table)
            {
                dump_kernel_table(out_path("kernel_table.csv"), c.lattice, table);
                outcome.files.push_back(out_path("kernel_table.csv"));
            }
            if (c.dump_wigner_table)
            {
                dump_wigner_table(out_path("wigner.csv"), c.lattice, wigner);
                outcome.files.push_back(out_path("wigner.csv"));
            }
            outcome.result = std::move(result);
            break;
        }
        case Subcommand::amplitude:
        {
            auto psi = c.initial_state();
            AmplitudeResult a = feynman_amplitude(c.lattice, c.potentials(), psi);
            std::vector<double> mass(a.psi.size());
            for (std::size_t i = 0; i < mass.size(); ++i)
            {
                mass[i] = std::norm(a.psi[i]) * c.lattice.spacing();
            }
            ResultTable result = deterministic_table(c.lattice, std::move(mass));
            meta["diagnostics"] = {{"norm", a.norm}, {"warnings", a.warnings}};
            summary << "amplitude: " << c.lattice.n_slices << " propagator steps, norm " << a.norm << "\n";
            for (const auto& w : a.warnings)
            {
                summary << "warning: " << w << "\n";
            }
            emit("amplitude.csv", format_result_csv(result));
            emit("amplitude.json", dump(meta));
            outcome.result = std::move(result);
            break;
        }
        case Subcommand::reference:
        {
            auto psi = c.initial_state();
            double t = c.reference_time.value_or(static_cast<double>(c.lattice.n_slices));
            ReferenceResult r = schrodinger_reference(psi, c.potentials(), t, c.reference_steps, c.lattice);
            std::vector<double> mass(r.density.size());
            for (std::size_t i = 0; i < mass.size(); ++i)
            {
                mass[i] = r.density[i] * c.lattice.spacing();
            }
            ResultTable result = deterministic_table(c.lattice, std::move(mass));
            meta["diagnostics"] = {{"norm", r.norm}, {"total_time", t}, {"steps", c.reference_steps}};
            summary << "reference: Crank-Nicolson to t = " << t << " in " << c.reference_steps
                    << " steps, norm " << r.norm << "\n";
            emit("reference.csv", format_result_csv(result));
            emit("reference.json", dump(meta));
            outcome.result = std::move(result);
            break;
        }
        case Subcommand::compare:
        {
            Report r = emit_report(c.compare_inputs, c.z_limit);
            emit("report.txt", r.text);
            emit("report.json", r.json);
            summary << r.text;
            break;
        }
    }
    double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    summary << "wall clock " << seconds << " s\n";
    for (const auto& f : outcome.files)
    {
        summary << "wrote " << f << "\n";
    }
    outcome.summary = summary.str();
    return outcome;
}

}  // namespace epsqmc
