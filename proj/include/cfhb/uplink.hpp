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

#include <functional>
#include <span>
#include <vector>

#include "cfhb/estimation.hpp"
#include "cfhb/rates.hpp"
#include "cfhb/rmt.hpp"

namespace cfhb {

/// Per-user SINR as a function of the transmit powers (mW).
using SinrFunction = std::function<std::vector<double>(std::span<const double> powers)>;

/// v_k = Omega^-1 hhat_k, Omega = sum_k P_k hhat_k hhat_k^H + D.
std::vector<CVec> mmse_combiner(const EffectiveChannelEstimate& estimates, const BlockDiag& D,
                                std::span<const double> powers);
std::vector<CVec> mmse_combiner(const EffectiveChannelEstimate& estimates, const EffectiveChannelStatistics& stats,
                                std::span<const double> powers);

/// Rayleigh quotient P_k |v^H hhat_k|^2 / v^H (sum_{k' != k} P_k' hhat hhat^H + D) v
/// for an arbitrary combiner v.
double combiner_sinr(const EffectiveChannelEstimate& estimates, const BlockDiag& D, std::span<const double> powers,
                     int k, const CVec& v);

/// SINR_k = P_k hhat_k^H Omega_k^-1 hhat_k, one coherence block. Evaluated
/// through a QR factor of the D-whitened interference, without forming
/// Omega_k, when D is well conditioned.
std::vector<double> uplink_sinr_exact(const EffectiveChannelEstimate& estimates, const BlockDiag& D,
                                      std::span<const double> powers);
/// Same, with D assembled from `stats` for `powers`.
std::vector<double> uplink_sinr_exact(const EffectiveChannelEstimate& estimates,
                                      const EffectiveChannelStatistics& stats, std::span<const double> powers);

/// Mean of uplink_sinr_exact over a fixed batch of estimates (common random
/// numbers for every power vector).
std::vector<double> uplink_sinr_exact_mean(std::span<const EffectiveChannelEstimate> batch,
                                           const EffectiveChannelStatistics& stats, std::span<const double> powers);

/// First large-scale approximation. May be negative.
std::vector<double> uplink_sinr_approx1(const EffectiveChannelStatistics& stats, std::span<const double> powers);

/// Second large-scale approximation: SINR_k = e_k of the fixed point with
/// weights P, covariances C, S0 = D, z = 0, n = M N_RF.
std::vector<double> uplink_sinr_approx2(const EffectiveChannelStatistics& stats, std::span<const double> powers,
                                        const FixedPointOptions& options = {});

struct MaxMinOptions {
    double tolerance = 1e-6; // on max_k |delta p_k| / p_k
    int max_iterations = 500;
};

struct MaxMinResult {
    std::vector<double> p;      // normalized, max = 1
    std::vector<double> powers; // p * p_max, mW
    std::vector<double> sinr;   // at `powers`
    int iterations = 0;
    bool converged = false;
    double min_sinr = 0.0;
    double spread = 0.0; // (max - min) / min of sinr
};

/// p_k <- p_k / SINR_k(p_max p), then p <- p / max(p). Throws NumericalError
/// when some SINR_k is zero (or negative) for a positive p_k.
MaxMinResult maxmin_power(const SinrFunction& sinr, std::span<const double> p0, double p_max,
                          const MaxMinOptions& options = {});

std::vector<double> uplink_rate(std::span<const double> sinr, const ScenarioConfig& config);

} // namespace cfhb
