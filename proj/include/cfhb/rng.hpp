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

#include <cstdint>
#include <initializer_list>
#include <random>

#include "cfhb/linalg.hpp"

namespace cfhb {

/// SplitMix64 finalizer; the mixing step used to derive independent
/// sub-stream seeds from (seed, counter...) tuples.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Counter-based seed derivation: the result depends only on the seed and the
/// ordered tags, so streams for (block, m, k) can be created in any order.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) noexcept;

/// Stream tags, kept distinct so different kinds of randomness never share a
/// sub-stream.
enum class StreamTag : std::uint64_t {
    Geometry = 0x47454f4dULL,
    Pilots = 0x50494c4fULL,
    Channel = 0x4348414eULL,
    Noise = 0x4e4f4953ULL,
    Oracle = 0x4f524143ULL,
};

inline std::uint64_t tag(StreamTag t) noexcept { return static_cast<std::uint64_t>(t); }

/// Deterministic random source. Uniforms and normals are produced from the
/// raw 64-bit engine output by fixed formulas, so values are identical across
/// standard-library implementations.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1).
    double uniform();
    /// Standard real normal N(0, 1).
    double normal();
    /// Circularly-symmetric complex normal CN(0, variance).
    cplx complex_normal(double variance = 1.0);
    /// exp(j*theta) with theta uniform on [0, 2*pi).
    cplx unit_phase();

    /// Vector of i.i.d. CN(0, variance) entries.
    CVec complex_normal_vector(Eigen::Index n, double variance = 1.0);
    CMat complex_normal_matrix(Eigen::Index rows, Eigen::Index cols, double variance = 1.0);

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace cfhb
