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
#include <functional>
#include <span>
#include <vector>

#include "cfhb/deployment.hpp"
#include "cfhb/estimation.hpp"
#include "cfhb/rates.hpp"
#include "cfhb/rmt.hpp"

namespace cfhb {

/// vhat_k = (sum_k' hhat_k' hhat_k'^H + rho I)^-1 hhat_k for every user.
std::vector<CVec> rzf_precoder(const EffectiveChannelEstimate& estimates, double rho);

/// Per-user scaling nu_k = max_m sqrt(E ||vhat_mk||^2) and the per-AP second
/// moments it was taken from (row m, column k).
struct DlPrecoderSet {
    RMat second_moments;
    std::vector<double> nu;
    double rho = 0.0;
};

/// samples[t][k] is the RZF direction of user k in realization t.
DlPrecoderSet normalize_precoder(const std::vector<std::vector<CVec>>& samples, int num_aps, int rf_chains,
                                 double rho);
/// Same, from accumulated per-AP second moments. Throws NumericalError when a
/// user's moments are all zero.
DlPrecoderSet normalize_precoder(RMat second_moments, double rho);

/// Monte Carlo estimate of the downlink SINR with all expectations taken over
/// the joint channel/noise/estimate distribution.
struct DlMonteCarlo {
    std::vector<double> sinr;
    DlPrecoderSet precoder;
    std::vector<double> signal;   // |E h_k^H v_k|^2
    RMat interference;            // (k, k'): E |h_k^H v_k'|^2
    std::vector<double> variance; // V{h_k^H v_k}
    int trials = 0;
};

/// Produces the realization of trial t (true effective channels and estimates).
using DlTrialSource = std::function<BlockSample(std::uint64_t trial)>;

DlMonteCarlo downlink_sinr_exact_mc(const DlTrialSource& source, int num_aps, int rf_chains,
                                    std::span<const double> dl_powers, double rho, int trials);
/// Trials are the deployment's coherence blocks 0 .. trials-1; requires
/// trials >= 100.
DlMonteCarlo downlink_sinr_exact_mc(const Deployment& deployment, std::span<const double> dl_powers, int trials);

/// Large-scale downlink approximation.
struct DlApproximation {
    std::vector<double> sinr;
    std::vector<double> e;     // (1/n) tr(C_k S)
    std::vector<double> nu2;   // normalization from per-AP block traces
    std::vector<double> alpha;
    RMat beta;                 // (k, k'), zero diagonal
};

DlApproximation downlink_sinr_approx(const EffectiveChannelStatistics& stats, std::span<const double> dl_powers,
                                     double rho, const FixedPointOptions& options = {});

std::vector<double> downlink_rate(std::span<const double> sinr, const ScenarioConfig& config);

} // namespace cfhb
