// SPDX-License-Identifier: Apache-2.0
#include "epsqmc/eps.hpp"

#include <cmath>
#include <sstream>

#include "epsqmc/error.hpp"
#include "epsqmc/parallel.hpp"
#include "epsqmc/rng.hpp"

namespace epsqmc
{
namespace
{

std::string fmt(double x)
{
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

void require(bool ok, const std::string& what)
{
    if (!ok)
    {
        throw ValidationError(what);
    }
}

void require_histories(std::uint64_t histories)
{
    require(histories >= 1, "histories must be >= 1");
}

void require_unit(double x, const char* name)
{
    require(std::isfinite(x) && std::abs(x) <= 1.0,
            std::string(name) + " = " + fmt(x) + " violates |" + name + "| <= 1");
}

Estimate make_estimate(std::uint64_t c0, std::uint64_t c1, double v)
{
    Estimate e;
    e.count0 = c0;
    e.count1 = c1;
    double h = static_cast<double>(c0 + c1);
    double p = static_cast<double>(c0) / h;
    e.value = p - v;
    e.std_error = std::sqrt(p * (1.0 - p) / h);
    return e;
}

// One stochastic step of the two-state process.
inline int step(CounterRng& rng, int state, const SwapMatrix& m)
{
    return rng.bernoulli(m.leave_probability(state)) ? 1 - state : state;
}

struct Counts
{
    std::uint64_t c[2][2] = {{0, 0}, {0, 0}};  // [branch][final state]
};

template<class History>
Counts run_histories(std::uint64_t histories, std::uint64_t seed,
                     unsigned workers, History&& history)
{
    workers = resolve_workers(workers);
    std::vector<Counts> shard_counts(workers);
    parallel_shards(histories, workers,
                    [&](std::uint64_t begin, std::uint64_t end, unsigned s) {
                        Counts local;
                        for (std::uint64_t h = begin; h < end; ++h)
                        {
                            CounterRng rng(seed, h);
                            auto [branch, state] = history(rng);
                            ++local.c[branch][state];
                        }
                        shard_counts[s] = local;
                    });
    Counts total;
    for (const auto& sc : shard_counts)
    {
        for (int b = 0; b < 2; ++b)
        {
            for (int s = 0; s < 2; ++s)
            {
                total.c[b][s] += sc.c[b][s];
            }
        }
    }
    return total;
}

void validate_product(double k, double w, double v)
{
    require_unit(k, "k");
    require_unit(w, "w");
    require(v >= 0.0 && v <= 1.0, "v = " + fmt(v) + " violates 0 <= v <= 1");
    Interval iv = valid_v_interval(1.0 - k);
    require(iv.contains(v), "v = " + fmt(v) + " outside valid interval [" + fmt(iv.lo)
                                + ", " + fmt(iv.hi) + "] for k = " + fmt(k));
    double lambda = w + v;
    require(lambda >= -kAlgebraTol && lambda <= 1.0 + kAlgebraTol,
            "w + v = " + fmt(lambda) + " violates 0 <= w + v <= 1");
}

}  // namespace

//---------------------------------------------------------------------------//
EpsPair EpsPair::probability(double p0)
{
    EpsPair p(p0, 1.0 - p0, PairFlavor::probability);
    p.validate();
    return p;
}

EpsPair EpsPair::quasiprobability(double p0)
{
    return EpsPair(p0, -p0, PairFlavor::quasiprobability);
}

void EpsPair::validate() const
{
    if (flavor_ == PairFlavor::probability)
    {
        require(p0_ >= -kAlgebraTol && p1_ >= -kAlgebraTol
                    && std::abs(p0_ + p1_ - 1.0) <= kAlgebraTol,
                "probability pair (" + fmt(p0_) + ", " + fmt(p1_)
                    + ") must be nonnegative and sum to 1");
    }
    else
    {
        require(std::abs(p0_ + p1_) <= kAlgebraTol,
                "quasiprobability pair (" + fmt(p0_) + ", " + fmt(p1_)
                    + ") must sum to 0");
    }
}

//---------------------------------------------------------------------------//
SwapMatrix::SwapMatrix(double g, double v) : g_(g), v_(v)
{
    require(std::isfinite(g) && g >= 0.0 && g <= 2.0,
            "g = " + fmt(g) + " violates 0 <= g <= 2");
    require(std::isfinite(v) && v >= 0.0 && v <= 1.0,
            "v = " + fmt(v) + " violates 0 <= v <= 1");
    require(g * (1.0 - v) <= 1.0,
            "g(1-v) = " + fmt(g * (1.0 - v)) + " violates g(1-v) <= 1");
    require(g * v <= 1.0, "gv = " + fmt(g * v) + " violates gv <= 1");
}

Interval valid_v_interval(double g)
{
    require(std::isfinite(g) && g >= 0.0 && g <= 2.0,
            "g = " + fmt(g) + " violates 0 <= g <= 2");
    if (g <= 1.0)
    {
        return {0.0, 1.0};
    }
    return {(g - 1.0) / g, 1.0 / g};
}

EpsPair apply(const SwapMatrix& m, const EpsPair& p)
{
    require(p.flavor() == PairFlavor::probability,
            "swap matrices act on probability pairs");
    return EpsPair(m.m00() * p.p0() + m.m01() * p.p1(),
                   m.m10() * p.p0() + m.m11() * p.p1(),
                   PairFlavor::probability);
}

//---------------------------------------------------------------------------//
void ChainSpec::validate() const
{
    require_unit(w, "w");
    require(v >= 0.0 && v <= 1.0, "v = " + fmt(v) + " violates 0 <= v <= 1");
    for (double k : ks)
    {
        require_unit(k, "k");
        Interval iv = valid_v_interval(1.0 - k);
        require(iv.contains(v), "v = " + fmt(v) + " outside valid interval ["
                                    + fmt(iv.lo) + ", " + fmt(iv.hi)
                                    + "] for k = " + fmt(k));
    }
    double lambda = w + v;
    require(lambda >= -kAlgebraTol && lambda <= 1.0 + kAlgebraTol,
            "w + v = " + fmt(lambda) + " violates 0 <= w + v <= 1");
}

Estimate simulate_product(double k, double w, double v, std::uint64_t histories,
                          std::uint64_t seed, unsigned workers)
{
    validate_product(k, w, v);
    require_histories(histories);
    SwapMatrix m(1.0 - k, v);
    double lambda = w + v;
    Counts c = run_histories(histories, seed, workers, [&](CounterRng& rng) {
        int state = rng.bernoulli(lambda) ? 0 : 1;
        return std::pair{0, step(rng, state, m)};
    });
    return make_estimate(c.c[0][0], c.c[0][1], v);
}

Estimate simulate_chain(const ChainSpec& spec, std::uint64_t histories,
                        std::uint64_t seed, unsigned workers)
{
    spec.validate();
    require_histories(histories);
    std::vector<SwapMatrix> links;
    links.reserve(spec.ks.size());
    for (double k : spec.ks)
    {
        links.emplace_back(1.0 - k, spec.v);
    }
    double lambda = spec.w + spec.v;
    Counts c = run_histories(histories, seed, workers, [&](CounterRng& rng) {
        int state = rng.bernoulli(lambda) ? 0 : 1;
        for (const auto& m : links)
        {
            state = step(rng, state, m);
        }
        return std::pair{0, state};
    });
    return make_estimate(c.c[0][0], c.c[0][1], spec.v);
}

CancellationEstimate simulate_cancellation(double k, double w, double v,
                                           std::uint64_t histories,
                                           std::uint64_t seed, unsigned workers)
{
    validate_product(k, w, v);
    validate_product(k, -w, v);
    require_histories(histories);
    SwapMatrix m(1.0 - k, v);
    Counts c = run_histories(histories, seed, workers, [&](CounterRng& rng) {
        int branch = rng.bernoulli(0.5) ? 0 : 1;
        double lambda = branch == 0 ? v + w : v - w;
        int state = rng.bernoulli(lambda) ? 0 : 1;
        return std::pair{branch, step(rng, state, m)};
    });
    CancellationEstimate out;
    out.plus0 = c.c[0][0];
    out.plus1 = c.c[0][1];
    out.minus0 = c.c[1][0];
    out.minus1 = c.c[1][1];
    out.total = make_estimate(out.plus0 + out.minus0, out.plus1 + out.minus1, v);
    return out;
}

double chain_state0_probability(std::span<const double> ks, double w, double v)
{
    EpsPair p = EpsPair::probability(w + v);
    for (double k : ks)
    {
        p = apply(SwapMatrix(1.0 - k, v), p);
    }
    return p.p0();
}

}  // namespace epsqmc
