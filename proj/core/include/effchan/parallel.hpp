// SPDX-License-Identifier: Apache-2.0
//
// effchan: effective-channel estimation for impaired multi-user MIMO uplinks
// Copyright (C) 2026 The effchan authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef EFFCHAN_PARALLEL_HPP
#define EFFCHAN_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace effchan
{

// Fixed work partition: item i always belongs to chunk i / chunk_size, independent of the thread count.
struct ChunkPlan
{
    std::size_t items = 0;
    std::size_t chunk_size = 1;

    [[nodiscard]] std::size_t chunks() const { return chunk_size ? (items + chunk_size - 1) / chunk_size : 0; }
    [[nodiscard]] std::size_t begin(std::size_t c) const { return c * chunk_size; }
    [[nodiscard]] std::size_t end(std::size_t c) const { return std::min(items, (c + 1) * chunk_size); }
};

// Calls fn(chunk_index, begin, end) for every chunk on up to `threads` workers. Callers write results into
// per-chunk slots and reduce them in chunk order, which keeps the output independent of scheduling.
template <typename Fn>
void for_each_chunk(const ChunkPlan &plan, int threads, Fn &&fn)
{
    const std::size_t n = plan.chunks();
    const auto workers = static_cast<std::size_t>(std::max(1, threads));
    if (workers == 1 || n <= 1)
    {
        for (std::size_t c = 0; c < n; ++c)
            fn(c, plan.begin(c), plan.end(c));
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(workers, n); ++w)
        pool.emplace_back([&] {
            for (std::size_t c = next++; c < n; c = next++)
            {
                try
                {
                    fn(c, plan.begin(c), plan.end(c));
                }
                catch (...)
                {
                    std::lock_guard lock(error_mutex);
                    if (!error)
                        error = std::current_exception();
                }
            }
        });
    for (auto &t : pool)
        t.join();
    if (error)
        std::rethrow_exception(error);
}

} // namespace effchan

#endif
