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

#include "cfhb/scenario.hpp"

#include <cmath>
#include <numbers>

#include "cfhb/errors.hpp"
#include "cfhb/rng.hpp"

namespace cfhb {

void ScenarioConfig::validate() const
{
    auto require = [](bool ok, const char* msg) {
        if (!ok)
            throw ConfigError(msg);
    };
    require(num_aps > 0, "num_aps must be a positive integer");
    require(antennas_per_ap > 0, "antennas_per_ap must be a positive integer");
    require(rf_chains > 0, "rf_chains must be a positive integer");
    require(rf_chains <= antennas_per_ap, "rf_chains must not exceed antennas_per_ap");
    require(num_users > 0, "num_users must be a positive integer");
    require(num_users <= num_aps * rf_chains, "num_users must not exceed num_aps * rf_chains (one RF chain per user)");
    require(pilot_len >= 1, "pilot_len must be at least 1");
    require(coherence_len >= pilot_len, "pilot_len must not exceed coherence_len");
    require(pilot_power_mw > 0.0 && ul_power_mw > 0.0 && dl_power_mw > 0.0, "all powers must be positive");
    require(bandwidth_mhz > 0.0, "bandwidth_mhz must be positive");
    require(area_side_m >= 0.0, "area_side_m must be non-negative");
    require(correlation.angular_spread_deg >= 0.0, "angular_spread_deg must be non-negative");
    require(std::abs(correlation.coefficient) < 1.0, "correlation_coefficient must satisfy |r| < 1");
    require(pathloss.min_distance_m > 0.0, "pathloss_min_distance_m must be positive");
    require(pilot_kind != PilotKind::Orthogonal || pilot_len >= num_users, "orthogonal pilots require pilot_len >= num_users");
    require(!dl_rho || *dl_rho > 0.0, "dl_rho must be positive");
}

double ScenarioConfig::se_prefactor() const noexcept
{
    return static_cast<double>(coherence_len - pilot_len) / (2.0 * coherence_len);
}

double ScenarioConfig::default_rho() const noexcept
{
    return static_cast<double>(num_users) / static_cast<double>(stacked_dim()) / dl_power_mw;
}

double noise_power_dbm(const ScenarioConfig& config)
{
    if (!(config.bandwidth_mhz > 0.0))
        throw ConfigError("noise_power_dbm: bandwidth must be positive");
    return -174.0 + 10.0 * std::log10(config.bandwidth_mhz * 1e6) + config.noise_figure_db;
}

Geometry generate_geometry(const ScenarioConfig& config, std::uint64_t seed)
{
    RandomStream rng(derive_seed(seed, {tag(StreamTag::Geometry)}));
    const double side = config.area_side_m;
    Geometry g;
    g.aps.resize(static_cast<std::size_t>(config.num_aps));
    g.users.resize(static_cast<std::size_t>(config.num_users));
    for (Position& p : g.aps) {
        p.x = side * rng.uniform();
        p.y = side * rng.uniform();
    }
    for (Position& p : g.users) {
        p.x = side * rng.uniform();
        p.y = side * rng.uniform();
    }
    return g;
}

CMat correlation_shape(const CorrelationModel& model, int antennas, double bearing_rad)
{
    const Eigen::Index n = antennas;
    switch (model.kind) {
    case CorrelationKind::Identity:
        return CMat::Identity(n, n);
    case CorrelationKind::Exponential: {
        if (std::abs(model.coefficient) >= 1.0)
            throw ConfigError("exponential correlation requires |r| < 1");
        CMat r(n, n);
        for (Eigen::Index a = 0; a < n; ++a)
            for (Eigen::Index b = 0; b < n; ++b)
                r(a, b) = std::pow(model.coefficient, static_cast<double>(std::abs(a - b)));
        return r;
    }
    case CorrelationKind::LocalScattering: {
        if (model.angular_spread_deg < 0.0)
            throw ConfigError("angular spread must be non-negative");
        // Half-wavelength ULA, Gaussian angular spread around the bearing
        // (small-spread closed form). Schur product of two PSD Toeplitz
        // matrices, so PSD with unit diagonal.
        const double sigma = model.angular_spread_deg * std::numbers::pi / 180.0;
        const double s = std::sin(bearing_rad);
        const double c = std::cos(bearing_rad);
        CMat r(n, n);
        for (Eigen::Index a = 0; a < n; ++a) {
            for (Eigen::Index b = 0; b < n; ++b) {
                const double d = static_cast<double>(a - b);
                const double spread = std::numbers::pi * d * c;
                const double mag = std::exp(-0.5 * sigma * sigma * spread * spread);
                const double phase = std::numbers::pi * d * s;
                r(a, b) = std::polar(mag, phase);
            }
        }
        return r;
    }
    }
    throw ConfigError("unknown correlation model");
}

double pathloss_db(const PathlossModel& model, double distance_m)
{
    const double d = std::max(distance_m, model.min_distance_m);
    return model.ref_db + 10.0 * model.exponent * std::log10(d);
}

SpatialCorrelationSet build_correlation(const ScenarioConfig& config, const Geometry& geometry)
{
    if (static_cast<int>(geometry.aps.size()) != config.num_aps || static_cast<int>(geometry.users.size()) != config.num_users)
        throw DimensionError("build_correlation: geometry does not match configuration");
    const double noise_mw = std::pow(10.0, noise_power_dbm(config) / 10.0);

    SpatialCorrelationSet set;
    set.num_aps = config.num_aps;
    set.num_users = config.num_users;
    set.antennas = config.antennas_per_ap;
    set.R.reserve(static_cast<std::size_t>(config.num_aps * config.num_users));
    set.beta.reserve(set.R.capacity());
    for (const Position& ap : geometry.aps) {
        for (const Position& ue : geometry.users) {
            const double dx = ue.x - ap.x;
            const double dy = ue.y - ap.y;
            const double dist = std::hypot(dx, dy);
            const double beta = std::pow(10.0, -pathloss_db(config.pathloss, dist) / 10.0) / noise_mw;
            const double bearing = std::atan2(dy, dx);
            set.R.push_back(beta * correlation_shape(config.correlation, config.antennas_per_ap, bearing));
            set.beta.push_back(beta);
        }
    }
    return set;
}

} // namespace cfhb
