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
#include <stdexcept>
#include <string>
#include <vector>

#include "cfhb/rates.hpp"
#include "cfhb/scenario.hpp"
#include "cfhb/uplink.hpp"

namespace cfhb {

/// Mode label of exact uplink samples evaluated at max-min optimized powers.
inline constexpr const char* kMaxMinMode = "exact_mc_maxmin";

struct Campaign {
    ScenarioConfig scenario;
    std::vector<Method> modes{Method::ExactMC, Method::Approx2};
    int geometry_draws = 1;
    int first_geometry = 0;      // geometry ids are first_geometry .. first_geometry + geometry_draws - 1
    int blocks_per_geometry = 1; // uplink exact samples per geometry
    int dl_trials = 0;           // downlink MC trials; 0 means max(100, blocks_per_geometry)
    bool power_opt = false;      // adds exact_mc_maxmin samples (approx2 utility)
    Method power_utility = Method::Approx2;
    int power_batch = 0;         // blocks averaged by the exact utility; 0 means min(blocks, 100)
    std::string output_dir;      // empty: nothing is written

    std::uint64_t seed() const noexcept { return scenario.master_seed; }
    int effective_dl_trials() const noexcept;
    /// Throws ConfigError on invalid settings.
    void validate() const;
};

/// Raised when a module fails; carries the failing coordinates (block -1
/// for large-scale stages).
class CampaignError : public std::runtime_error {
public:
    CampaignError(const std::string& what, int geometry, std::int64_t block)
        : std::runtime_error(what), geometry_(geometry), block_(block) {}
    int geometry() const noexcept { return geometry_; }
    std::int64_t block() const noexcept { return block_; }

private:
    int geometry_;
    std::int64_t block_;
};

struct SampleRow {
    int geometry_id = 0;
    std::int64_t block_id = -1; // -1 for large-scale-only modes and downlink MC
    int user = 0;
    std::string mode;
    double sinr = 0.0;
    double se = 0.0;
};

/// Sorted samples with step CDF F(x) = #{samples <= x} / n.
class EmpiricalCdf {
public:
    explicit EmpiricalCdf(std::vector<double> samples);

    const std::vector<double>& values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    double operator()(double x) const;
    /// Linear interpolation between order statistics at position q (n - 1).
    double quantile(double q) const;

private:
    std::vector<double> values_;
};

EmpiricalCdf empirical_cdf(std::vector<double> samples);

struct OutageSummary {
    std::string mode;
    std::size_t n_samples = 0;
    double mean_se = 0.0;
    double outage95_se = 0.0; // 5th percentile
    double median_se = 0.0;
    double max_se = 0.0;
    std::vector<double> cdf_grid; // quantiles at q = 0, 0.01, ..., 1
};

OutageSummary summarize(const std::string& mode, std::vector<double> se);

/// Max-min power record of one geometry.
struct PowerRecord {
    int geometry_id = 0;
    std::vector<double> powers; // mW
    std::vector<double> utility_sinr;
    int iterations = 0;
    bool converged = false;
};

struct CampaignResult {
    std::vector<SampleRow> rows;
    std::vector<OutageSummary> summaries; // in mode order of first appearance
    std::vector<PowerRecord> power;
};

/// Runs every requested mode on every geometry. Output is identical for any
/// thread count.
CampaignResult run_campaign(const Campaign& campaign);

/// Power optimization experiment: per geometry, optimizes powers with
/// campaign.power_utility, then evaluates the utility and the exact uplink
/// SINR at full and optimized power.
CampaignResult run_power_opt(const Campaign& campaign);

std::string samples_csv(const std::vector<SampleRow>& rows);
std::string summary_json(const Campaign& campaign, const CampaignResult& result);
std::string power_csv(const std::vector<PowerRecord>& records);

/// Writes samples.csv, summary.json and (when present) power.csv into
/// campaign.output_dir, creating it if needed.
void write_outputs(const Campaign& campaign, const CampaignResult& result);

} // namespace cfhb
