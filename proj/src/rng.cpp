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

#include "cfhb/rng.hpp"

#include <cmath>
#include <numbers>

namespace cfhb {

std::uint64_t mix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) noexcept
{
    std::uint64_t h = mix64(seed);
    for (std::uint64_t t : tags)
        h = mix64(h ^ mix64(t + 0x632be59bd9b4e019ULL));
    return h;
}

double RandomStream::uniform()
{
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RandomStream::normal()
{
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // Box-Muller; 1 - u keeps the log argument in (0, 1].
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(phi);
    has_spare_ = true;
    return r * std::cos(phi);
}

cplx RandomStream::complex_normal(double variance)
{
    const double s = std::sqrt(0.5 * variance);
    const double re = normal();
    const double im = normal();
    return {s * re, s * im};
}

cplx RandomStream::unit_phase()
{
    const double phi = 2.0 * std::numbers::pi * uniform();
    return {std::cos(phi), std::sin(phi)};
}

CVec RandomStream::complex_normal_vector(Eigen::Index n, double variance)
{
    CVec v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        v[i] = complex_normal(variance);
    return v;
}

CMat RandomStream::complex_normal_matrix(Eigen::Index rows, Eigen::Index cols, double variance)
{
    CMat a(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i)
            a(i, j) = complex_normal(variance);
    return a;
}

} // namespace cfhb
