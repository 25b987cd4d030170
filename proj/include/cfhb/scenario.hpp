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

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cfhb/linalg.hpp"

namespace cfhb {

enum class CorrelationKind { LocalScattering, Exponential, Identity };
enum class PilotKind { Random, Orthogonal };

struct CorrelationModel {
    CorrelationKind kind = CorrelationKind::LocalScattering;
    double angular_spread_deg = 15.0; // LocalScattering: std-dev of the Gaussian angle spread
    double coefficient = 0.5;         // Exponential: [R]_ab = r^|a-b|
};

/// Log-distance path loss PL(d) = ref_db + 10 * exponent * log10(max(d, min_distance_m) / 1 m).
struct PathlossModel {
    double ref_db = 30.0;
    double exponent = 3.7;
    double min_distance_m = 1.0;
};

/// Every deterministic simulation parameter. Powers are in mW, lengths in
/// channel uses, geometry in meters. M, N and N_RF have no defaults.
struct ScenarioConfig {
    int num_aps = 0;          // M
    int antennas_per_ap = 0;  // N
    int rf_chains = 0;        // N_RF
    int num_users = 16;       // K
    int coherence_len = 200;  // tau_c
    int pilot_len = 16;       // tau_p
    double pilot_power_mw = 20.0;
    double ul_power_mw = 20.0;
    double dl_power_mw = 200.0;
    double carrier_freq_ghz = 1.9;
    double bandwidth_mhz = 20.0;
    double noise_figure_db = 9.0;
    double area_side_m = 100.0;
    CorrelationModel correlation;
    PathlossModel pathloss;
    PilotKind pilot_kind = PilotKind::Random;
    /// RZF regularization; when unset, default_rho() is used.
    std::optional<double> dl_rho;
    std::uint64_t master_seed = 1;

    /// Throws ConfigError on any violated invariant.
    void validate() const;

    /// M * N_RF, the dimension of the stacked effective channel at the CPU.
    int stacked_dim() const noexcept { return num_aps * rf_chains; }
    /// (tau_c - tau_p) / (2 tau_c).
    double se_prefactor() const noexcept;
    /// K / (M N_RF) / P_d, in noise-normalized channel units.
    double default_rho() const noexcept;
    double rho() const noexcept { return dl_rho.value_or(default_rho()); }
};

/// Thermal noise power -174 dBm/Hz + 10 log10(BW) + NF.
double noise_power_dbm(const ScenarioConfig& config);

struct Position {
    double x = 0.0;
    double y = 0.0;
};

struct Geometry {
    std::vector<Position> aps;
    std::vector<Position> users;
};

/// APs and users i.i.d. uniform over [0, area_side]^2, deterministic in seed.
Geometry generate_geometry(const ScenarioConfig& config, std::uint64_t seed);

/// Noise-normalized spatial correlation matrices R_mk (N x N, Hermitian PSD)
/// and the large-scale gains beta_mk = tr(R_mk) / N.
struct SpatialCorrelationSet {
    int num_aps = 0;
    int num_users = 0;
    int antennas = 0;
    std::vector<CMat> R;      // index m * K + k
    std::vector<double> beta; // index m * K + k

    const CMat& at(int m, int k) const { return R.at(static_cast<std::size_t>(m * num_users + k)); }
    double gain(int m, int k) const { return beta.at(static_cast<std::size_t>(m * num_users + k)); }
};

/// Unit-trace-per-antenna correlation shape (trace N) for one AP/user pair.
CMat correlation_shape(const CorrelationModel& model, int antennas, double bearing_rad);

/// Path loss in dB at distance d meters.
double pathloss_db(const PathlossModel& model, double distance_m);

SpatialCorrelationSet build_correlation(const ScenarioConfig& config, const Geometry& geometry);

// ---------------------------------------------------------------------------
// Config files: flat "key = value" documents, '#' starts a comment.

ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);
/// Applies a single key/value pair; throws ConfigError on unknown keys or
/// malformed values.
void apply_config_value(ScenarioConfig& config, const std::string& key, const std::string& value);
/// Canonical serialization (all keys, fixed order); parse_config inverts it.
std::string format_config(const ScenarioConfig& config);
/// FNV-1a hash of format_config, as 16 hex digits.
std::string config_fingerprint(const ScenarioConfig& config);

} // namespace cfhb
