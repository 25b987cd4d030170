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

#include "cfhb/deployment.hpp"

#include "cfhb/rng.hpp"

namespace cfhb {

std::uint64_t geometry_seed(std::uint64_t master_seed, std::uint64_t geometry_id) noexcept
{
    return derive_seed(master_seed, {geometry_id});
}

Deployment::Deployment(const ScenarioConfig& config, std::uint64_t seed) : config_(config), seed_(seed)
{
    config_.validate();
    geometry_ = generate_geometry(config_, seed_);
    correlations_ = build_correlation(config_, geometry_);
    precoder_ = build_precoder(correlations_, allocate_rf_chains(correlations_, config_));
    pilots_ = generate_pilots(config_, seed_);
    inputs_ = effective_inputs(correlations_, precoder_);
    estimator_ = std::make_shared<const LmmseEstimator>(inputs_, pilots_, config_.pilot_power_mw);
    stats_ = estimate_covariances(*estimator_, inputs_, full_powers());
    sampler_ = std::make_shared<const ChannelSampler>(correlations_);
}

std::vector<double> Deployment::full_powers() const
{
    return std::vector<double>(static_cast<std::size_t>(config_.num_users), config_.ul_power_mw);
}

BlockSample Deployment::draw_block(std::uint64_t block_index) const
{
    const ChannelRealization channels = sampler_->draw(seed_, block_index);
    const std::vector<CMat> noise =
        draw_pilot_noise(config_.num_aps, config_.antennas_per_ap, config_.pilot_len, seed_, block_index);
    BlockSample out;
    out.h = effective_channels(precoder_, channels);
    out.estimate = estimator_->estimate(receive_pilots(precoder_, channels, pilots_, config_.pilot_power_mw, noise));
    return out;
}

} // namespace cfhb
