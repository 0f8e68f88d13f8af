// SPDX-License-Identifier: Apache-2.0
#include "epsqmc/parallel.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <thread>
#include <vector>

namespace epsqmc
{

unsigned resolve_workers(unsigned requested)
{
    unsigned n = requested;
    if (n == 0)
    {
        n = std::max(1u, std::thread::hardware_concurrency());
    }
    if (const char* cap = std::getenv(kWorkerEnv))
    {
        unsigned value = 0;
        auto [ptr, ec] = std::from_chars(cap, cap + std::strlen(cap), value);
        if (ec == std::errc{} && value > 0)
        {
            n = std::min(n, value);
        }
    }
    return n;
}

void parallel_shards(std::uint64_t count,
                     unsigned workers,
                     const std::function<void(std::uint64_t, std::uint64_t, unsigned)>& body)
{
    workers = std::max(1u, workers);
    if (workers == 1 || count < 2)
    {
        body(0, count, 0);
        return;
    }
    auto shards = static_cast<unsigned>(std::min<std::uint64_t>(workers, count));
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(shards);
    threads.reserve(shards);
    for (unsigned s = 0; s < shards; ++s)
    {
        std::uint64_t begin = count * s / shards;
        std::uint64_t end = count * (s + 1) / shards;
        threads.emplace_back([&, begin, end, s] {
            try
            {
                body(begin, end, s);
            }
            catch (...)
            {
                errors[s] = std::current_exception();
            }
        });
    }
    for (auto& t : threads)
    {
        t.join();
    }
    for (auto& e : errors)
    {
        if (e)
        {
            std::rethrow_exception(e);
        }
    }
}

}  // namespace epsqmc
