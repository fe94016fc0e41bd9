#pragma once

/**
 * @file parallel.hpp
 * @brief Deterministic chunked reductions on top of TBB.
 *
 * Work is split into fixed chunks independent of the thread count; partial
 * results are combined in chunk order, so sums are bitwise reproducible.
 * ERGOMAX_THREADS caps the worker count.
 */

#include <tbb/blocked_range.h>
#include <tbb/parallel_for.h>
#include <tbb/task_arena.h>

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <string>
#include <vector>

namespace ergomax {

inline int thread_cap()
{
    const int hw = tbb::this_task_arena::max_concurrency();
    const char* env = std::getenv("ERGOMAX_THREADS");
    if (env && *env) {
        try {
            int n = std::stoi(env);
            if (n >= 1) return std::min(n, hw);
        } catch (...) {
        }
    }
    return hw;
}

/**
 * Evaluate body(begin, end) on consecutive chunks of [0, n) and fold the
 * partial results left to right with combine(acc, part).
 */
template <class Acc, class Body, class Combine>
Acc chunked_reduce(std::size_t n, std::size_t chunk, Acc init, Body body, Combine combine)
{
    if (n == 0) return init;
    chunk = std::max<std::size_t>(chunk, 1);
    const std::size_t nchunks = (n + chunk - 1) / chunk;
    std::vector<Acc> parts(nchunks);
    auto run = [&] {
        tbb::parallel_for(tbb::blocked_range<std::size_t>(0, nchunks, 1), [&](const tbb::blocked_range<std::size_t>& r) {
            for (std::size_t c = r.begin(); c != r.end(); ++c)
                parts[c] = body(c * chunk, std::min(n, (c + 1) * chunk));
        });
    };
    const int cap = thread_cap();
    if (cap <= 1 || nchunks == 1) {
        for (std::size_t c = 0; c < nchunks; ++c) parts[c] = body(c * chunk, std::min(n, (c + 1) * chunk));
    } else {
        tbb::task_arena arena(cap);
        arena.execute(run);
    }
    for (auto& p : parts) combine(init, p);
    return init;
}

} // namespace ergomax
