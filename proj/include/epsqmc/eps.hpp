// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
/*!
 * Extended probability space (EPS) algebra.
 *
 * A signed number s in [-1, 1] is carried as the excess of a two-state
 * probability vector P over a fixed reference vector V = (v, 1 - v).
 * Multiplying the excess by k = 1 - g is realised by a column-stochastic
 * swap matrix M(g, v) that leaves V invariant, so signed products and
 * cancellations can be simulated with ordinary random choices.
 */
//---------------------------------------------------------------------------//
#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace epsqmc
{

inline constexpr double kAlgebraTol = 1e-12;
inline constexpr double kDefaultReference = 0.5;

enum class PairFlavor
{
    probability,
    quasiprobability,
};

/// Two-component EPS vector: (p0, p1).
class EpsPair
{
  public:
    static EpsPair probability(double p0);
    static EpsPair quasiprobability(double p0);
    // Unchecked; for intermediate results that are validated by the caller.
    EpsPair(double p0, double p1, PairFlavor flavor) : p0_(p0), p1_(p1), flavor_(flavor) {}

    double p0() const { return p0_; }
    double p1() const { return p1_; }
    PairFlavor flavor() const { return flavor_; }

    // Throws ValidationError if the flavor's invariant is broken.
    void validate() const;

  private:
    double p0_;
    double p1_;
    PairFlavor flavor_;
};

/// Closed interval of admissible reference levels.
struct Interval
{
    double lo;
    double hi;

    bool contains(double x, double tol = kAlgebraTol) const
    {
        return x >= lo - tol && x <= hi + tol;
    }
};

class SwapMatrix
{
  public:
    // Rejects g outside [0, 2], v outside [0, 1], and any negative entry.
    SwapMatrix(double g, double v);

    double g() const { return g_; }
    double v() const { return v_; }
    double k() const { return 1.0 - g_; }

    double m00() const { return 1.0 - g_ * (1.0 - v_); }
    double m01() const { return g_ * v_; }
    double m10() const { return g_ * (1.0 - v_); }
    double m11() const { return 1.0 - g_ * v_; }

    /// Probability of leaving `state` in one stochastic step.
    double leave_probability(int state) const { return state == 0 ? m10() : m01(); }

  private:
    double g_;
    double v_;
};

Interval valid_v_interval(double g);

EpsPair apply(const SwapMatrix& m, const EpsPair& p);

/// Monte Carlo estimate with the raw counts behind it.
struct Estimate
{
    double value = 0;
    double std_error = 0;
    std::uint64_t count0 = 0;
    std::uint64_t count1 = 0;
};

struct ChainSpec
{
    std::vector<double> ks;
    double w = 0;
    double v = kDefaultReference;

    void validate() const;
};

struct CancellationEstimate
{
    Estimate total;
    // Histories that selected the +s (resp. -s) branch, by final state.
    std::uint64_t plus0 = 0;
    std::uint64_t plus1 = 0;
    std::uint64_t minus0 = 0;
    std::uint64_t minus1 = 0;
};

Estimate simulate_product(double k, double w, double v, std::uint64_t histories,
                          std::uint64_t seed, unsigned workers = 1);

Estimate simulate_chain(const ChainSpec& spec, std::uint64_t histories,
                        std::uint64_t seed, unsigned workers = 1);

CancellationEstimate simulate_cancellation(double k, double w, double v,
                                           std::uint64_t histories,
                                           std::uint64_t seed,
                                           unsigned workers = 1);

/// Exact probability of ending in state 0 after the chain: (prod M) Po.
double chain_state0_probability(std::span<const double> ks, double w, double v);

}  // namespace epsqmc
