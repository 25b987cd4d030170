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

#include "cfhb/channel.hpp"

#include <cmath>

#include "cfhb/errors.hpp"
#include "cfhb/rng.hpp"

namespace cfhb {

CMat covariance_factor(const CMat& R)
{
    const HermitianEig eig = eig_descending(hermitian_part(R));
    const Eigen::Index n = R.rows();
    if (n == 0)
        return CMat(0, 0);
    const double lmax = std::max(0.0, eig.values.maxCoeff());
    RVec root(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double l = eig.values[i];
        if (l < -1e-10 * lmax || (lmax == 0.0 && l < 0.0))
            throw NumericalError("covariance_factor: matrix has a significantly negative eigenvalue");
        root[i] = l > 0.0 ? std::sqrt(l) : 0.0;
    }
    return eig.vectors * root.asDiagonal();
}

ChannelSampler::ChannelSampler(const SpatialCorrelationSet& correlations)
    : num_aps_(correlations.num_aps), num_users_(correlations.num_users)
{
    factors_.reserve(correlations.R.size());
    for (const CMat& R : correlations.R)
        factors_.push_back(covariance_factor(R));
}

CVec ChannelSampler::draw_one(std::uint64_t seed, std::uint64_t block_index, int m, int k) const
{
    const CMat& f = factors_.at(static_cast<std::size_t>(m * num_users_ + k));
    RandomStream rng(derive_seed(seed, {tag(StreamTag::Channel), block_index,
                                        static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(k)}));
    return f * rng.complex_normal_vector(f.cols());
}

ChannelRealization ChannelSampler::draw(std::uint64_t seed, std::uint64_t block_index) const
{
    ChannelRealization out;
    out.num_aps = num_aps_;
    out.num_users = num_users_;
    out.block_index = block_index;
    out.h.reserve(factors_.size());
    for (int m = 0; m < num_aps_; ++m)
        for (int k = 0; k < num_users_; ++k)
            out.h.push_back(draw_one(seed, block_index, m, k));
    return out;
}

ChannelRealization draw_channels(const SpatialCorrelationSet& correlations, std::uint64_t seed, std::uint64_t block_index)
{
    return ChannelSampler(correlations).draw(seed, block_index);
}

} // namespace cfhb
