// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>

namespace epsqmc
{

//---------------------------------------------------------------------------//
/*!
 * Counter-based generator (Philox4x32-10) addressed by (seed, stream).
 *
 * Every Monte Carlo history owns the stream equal to its history index, so
 * the draws a history sees do not depend on which worker runs it or in what
 * order.
 *
 * See Salmon et al., "Parallel random numbers: as easy as 1, 2, 3" (SC11).
 */
class CounterRng
{
  public:
    CounterRng(std::uint64_t seed, std::uint64_t stream)
        : key_{static_cast<std::uint32_t>(seed),
               static_cast<std::uint32_t>(seed >> 32)},
          counter_{0, 0, static_cast<std::uint32_t>(stream),
                   static_cast<std::uint32_t>(stream >> 32)}
    {
    }

    std::uint64_t next_u64()
    {
        if (avail_ == 0)
        {
            refill();
        }
        --avail_;
        return (static_cast<std::uint64_t>(block_[2 * avail_ + 1]) << 32)
               | block_[2 * avail_];
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n) (multiply-shift; bias below 2^-64 * n).
    std::uint64_t below(std::uint64_t n)
    {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    bool bernoulli(double p) { return uniform() < p; }

  private:
    static constexpr std::uint32_t kMulA = 0xD2511F53u;
    static constexpr std::uint32_t kMulB = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeylA = 0x9E3779B9u;
    static constexpr std::uint32_t kWeylB = 0xBB67AE85u;

    void refill()
    {
        std::array<std::uint32_t, 4> ctr = counter_;
        std::array<std::uint32_t, 2> key = key_;
        for (int round = 0; round < 10; ++round)
        {
            std::uint64_t p0 = static_cast<std::uint64_t>(kMulA) * ctr[0];
            std::uint64_t p1 = static_cast<std::uint64_t>(kMulB) * ctr[2];
            ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
                   static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
                   static_cast<std::uint32_t>(p0)};
            key[0] += kWeylA;
            key[1] += kWeylB;
        }
        block_ = ctr;
        avail_ = 2;
        // 64-bit block counter in the low words; stream id in the high words
        if (++counter_[0] == 0)
        {
            ++counter_[1];
        }
    }

    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> counter_;
    std::array<std::uint32_t, 4> block_{};
    int avail_ = 0;
};

}  // namespace epsqmc
