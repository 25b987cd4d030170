// SPDX-License-Identifier: Apache-2.0
//
// cfhb: cell-free massive MIMO with hybrid beamforming, simulation library
// Copyright (C) 2026 The cfhb Authors
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

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace cfhb {

/// Worker count used by parallel_for; 0 selects hardware_concurrency.
void set_thread_count(int threads) noexcept;
int thread_count() noexcept;

namespace detail {
bool& in_parallel_region() noexcept;
}

/// Calls body(i) for every i in [0, n). Work is handed out dynamically, so
/// callers write results into slot i and reduce in index order afterwards.
/// Nested calls run serially on the calling worker. If bodies throw, the
/// exception from the smallest failing index is rethrown.
template <class Body>
void parallel_for(std::size_t n, Body&& body)
{
    const int threads = thread_count();
    if (n == 0)
        return;
    if (threads <= 1 || n == 1 || detail::in_parallel_region()) {
        for (std::size_t i = 0; i < n; ++i)
            body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::size_t error_index = n;
    std::exception_ptr error;
    auto worker = [&] {
        detail::in_parallel_region() = true;
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n)
                break;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (i < error_index) {
                    error_index = i;
                    error = std::current_exception();
                }
            }
        }
        detail::in_parallel_region() = false;
    };
    const std::size_t count = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
    std::vector<std::thread> pool;
    pool.reserve(count - 1);
    for (std::size_t t = 1; t < count; ++t)
        pool.emplace_back(worker);
    worker();
    for (std::thread& t : pool)
        t.join();
    if (error)
        std::rethrow_exception(error);
}

} // namespace cfhb
