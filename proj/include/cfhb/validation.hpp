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
#include <string>
#include <vector>

#include "cfhb/analog_bf.hpp"
#include "cfhb/uplink.hpp"

namespace cfhb {

struct OracleReport {
    std::string check;
    std::string instance;
    double oracle = 0.0;
    double artifact = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

std::string oracle_report_csv(const std::vector<OracleReport>& reports);

/// Positive root of e (d + P c / (1 + e)) = P c n.
double scalar_fixed_point_oracle(double P, double c, double d, double n);

struct GridOracleResult {
    double best_min_sinr = 0.0;
    std::vector<double> argmax; // normalized powers, max entry 1
    std::size_t evaluated = 0;
};

/// Exhaustive max-min search over the grid {1..R}^K; each point v is
/// evaluated at p_max * v / max(v). K <= 3.
GridOracleResult power_grid_oracle(const SinrFunction& sinr, int num_users, int resolution, double p_max);

struct AllocationOracleResult {
    double best_min_energy = 0.0;
    std::vector<int> counts; // (m * K + k): chains of user k at AP m
    std::size_t evaluated = 0;
};

/// Enumerates every per-AP split of the N_RF chains among the users (a user
/// holding c chains at AP m collects its c largest eigenvalues there) and
/// returns the best minimum per-user energy. eigenvalues[m * K + k] must be
/// sorted in descending order. M * N_RF <= 8.
AllocationOracleResult exhaustive_allocation_oracle(const std::vector<std::vector<double>>& eigenvalues, int num_aps,
                                                    int rf_chains, int num_users);

struct ValidationOptions {
    std::uint64_t seed = 1;
    int trials = 200;        // Monte Carlo draws per check
    int grid_resolution = 100;
};

/// Runs the oracle suite at desk scale.
std::vector<OracleReport> run_validation(const ValidationOptions& options);

} // namespace cfhb
