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

#include "cfhb/parallel.hpp"

#include <cstdlib>

namespace cfhb {

namespace {
std::atomic<int> g_threads{0};
}

void set_thread_count(int threads) noexcept { g_threads.store(threads < 0 ? 0 : threads); }

int thread_count() noexcept
{
    const int t = g_threads.load();
    if (t > 0)
        return t;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

namespace detail {
bool& in_parallel_region() noexcept
{
    thread_local bool flag = false;
    return flag;
}
} // namespace detail

} // namespace cfhb
