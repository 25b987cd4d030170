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
#include <memory>
#include <vector>

#include "cfhb/analog_bf.hpp"
#include "cfhb/channel.hpp"
#include "cfhb/estimation.hpp"
#include "cfhb/scenario.hpp"

namespace cfhb {

/// Seed of geometry draw g under a campaign master seed.
std::uint64_t geometry_seed(std::uint64_t master_seed, std::uint64_t geometry_id) noexcept;

/// One coherence block after analog combining: true effective channels and
/// their LMMSE estimates.
struct BlockSample {
    std::vector<CVec> h;
    EffectiveChannelEstimate estimate;
};

/// Everything that depends only on one geometry draw: correlations, RF
/// allocation, analog precoder, pilots, LMMSE filters and the estimate
/// statistics at full uplink power. Blocks are drawn on demand and depend
/// only on (seed, block index).
class Deployment {
public:
    Deployment(const ScenarioConfig& config, std::uint64_t seed);

    const ScenarioConfig& config() const noexcept { return config_; }
    std::uint64_t seed() const noexcept { return seed_; }
    const Geometry& geometry() const noexcept { return geometry_; }
    const SpatialCorrelationSet& correlations() const noexcept { return correlations_; }
    const AnalogPrecoder& precoder() const noexcept { return precoder_; }
    const PilotBook& pilots() const noexcept { return pilots_; }
    const EffectiveInputs& inputs() const noexcept { return inputs_; }
    const LmmseEstimator& estimator() const noexcept { return *estimator_; }
    /// Statistics with every user at ul_power_mw.
    const EffectiveChannelStatistics& stats() const noexcept { return stats_; }
    std::vector<double> full_powers() const;

    BlockSample draw_block(std::uint64_t block_index) const;

private:
    ScenarioConfig config_;
    std::uint64_t seed_ = 0;
    Geometry geometry_;
    SpatialCorrelationSet correlations_;
    AnalogPrecoder precoder_;
    PilotBook pilots_;
    EffectiveInputs inputs_;
    std::shared_ptr<const LmmseEstimator> estimator_;
    EffectiveChannelStatistics stats_;
    std::shared_ptr<const ChannelSampler> sampler_;
};

} // namespace cfhb
