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

#include <string>
#include <vector>

#include "cfhb/scenario.hpp"

namespace cfhb {

/// Owner (user) and eigenvector rank of every RF chain, index m * N_RF + i.
struct RfAllocation {
    int num_aps = 0;
    int rf_chains = 0;
    std::vector<int> owner;
    std::vector<int> order;

    int owner_at(int m, int i) const { return owner.at(static_cast<std::size_t>(m * rf_chains + i)); }
    int order_at(int m, int i) const { return order.at(static_cast<std::size_t>(m * rf_chains + i)); }
    std::vector<int> chains_per_user(int num_users) const;
};

/// Per-AP analog combiners W_m (N x N_RF, entries of modulus 1/N).
struct AnalogPrecoder {
    std::vector<CMat> W;
    RfAllocation allocation;
};

/// Descending eigenvalues of every R_mk; the energy of giving user k the
/// eigenvector of rank r at AP m is values(m, k)[r].
struct EnergyTable {
    int num_aps = 0;
    int num_users = 0;
    int antennas = 0;
    std::vector<RVec> values; // index m * K + k

    const RVec& at(int m, int k) const { return values.at(static_cast<std::size_t>(m * num_users + k)); }
};

EnergyTable energy_table(const SpatialCorrelationSet& correlations);

/// (1/N) exp(j angle(u)) after fixing the global phase of u so that its
/// largest-modulus entry (lowest index on ties) is real positive. Entries of
/// negligible modulus get angle 0.
CVec phase_only_beam(const CVec& u);

/// Analog beam from the eigenvector of the (rank+1)-th largest eigenvalue.
CVec eigen_beamformer(const CMat& R, int rank);

/// Greedy max-min allocation. Phase 1 visits users from the weakest best-AP
/// gain upwards and gives each its strongest AP with a free chain. Phase 2
/// hands every remaining chain to the user with the smallest energy so far,
/// at the (AP, next rank) slot with the largest eigenvalue. Phase 3 applies
/// transfers and cross-AP swaps while the sorted user energies improve
/// lexicographically, then seeded perturbation rounds. A second start seeds
/// Phase 1 with a bottleneck matching of first chains; the better of the two
/// wins. Chains are then laid out per AP by user index and rank.
RfAllocation allocate_rf_chains(const EnergyTable& energies, int rf_chains);
RfAllocation allocate_rf_chains(const SpatialCorrelationSet& correlations, const ScenarioConfig& config);

/// Summed slot energy per user under an allocation.
std::vector<double> allocation_energy(const EnergyTable& energies, const RfAllocation& allocation);

/// Column i of W_m = eigen_beamformer(R_{m, owner}, order).
AnalogPrecoder build_precoder(const SpatialCorrelationSet& correlations, const RfAllocation& allocation);

/// W^H R W.
CMat effective_correlation(const CMat& R, const CMat& W);

/// CSV rows "m,i,owner,order,eigenvalue" with header.
std::string allocation_csv(const RfAllocation& allocation, const EnergyTable& energies);

} // namespace cfhb
