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
#include <vector>

#include "cfhb/scenario.hpp"

namespace cfhb {

/// One coherence block of small-scale fading, h[m][k] ~ CN(0, R_mk).
struct ChannelRealization {
    int num_aps = 0;
    int num_users = 0;
    std::uint64_t block_index = 0;
    std::vector<CVec> h; // index m * K + k, each of length N

    const CVec& at(int m, int k) const { return h.at(static_cast<std::size_t>(m * num_users + k)); }
};

/// Factor F with F F^H = R from the eigen-decomposition. Eigenvalues in
/// [-1e-10 lambda_max, 0) are clipped to zero; more negative ones mean R is
/// not PSD and raise NumericalError.
CMat covariance_factor(const CMat& R);

/// Draws channel realizations with per-(block, m, k) sub-streams, so any
/// subset of draws can be produced in any order (or concurrently) with the
/// same result.
class ChannelSampler {
public:
    explicit ChannelSampler(const SpatialCorrelationSet& correlations);

    CVec draw_one(std::uint64_t seed, std::uint64_t block_index, int m, int k) const;
    ChannelRealization draw(std::uint64_t seed, std::uint64_t block_index) const;

    int num_aps() const noexcept { return num_aps_; }
    int num_users() const noexcept { return num_users_; }

private:
    int num_aps_ = 0;
    int num_users_ = 0;
    std::vector<CMat> factors_;
};

ChannelRealization draw_channels(const SpatialCorrelationSet& correlations, std::uint64_t seed, std::uint64_t block_index);

} // namespace cfhb
