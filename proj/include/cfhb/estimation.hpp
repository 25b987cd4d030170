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
#include <span>
#include <vector>

#include "cfhb/analog_bf.hpp"
#include "cfhb/channel.hpp"
#include "cfhb/scenario.hpp"

namespace cfhb {

/// Pilot matrix Psi (tau_p x K); column k is psi_k with ||psi_k||^2 = tau_p.
struct PilotBook {
    PilotKind kind = PilotKind::Random;
    CMat psi;

    int length() const noexcept { return static_cast<int>(psi.rows()); }
    int num_users() const noexcept { return static_cast<int>(psi.cols()); }
};

/// Random: i.i.d. unit-circle entries. Orthogonal: first K columns of the
/// tau_p-point DFT matrix (Psi^H Psi = tau_p I), requires tau_p >= K.
PilotBook generate_pilots(PilotKind kind, int pilot_len, int num_users, std::uint64_t seed);
PilotBook generate_pilots(const ScenarioConfig& config, std::uint64_t seed);

/// Large-scale quantities after analog combining: R_emk = W_m^H R_mk W_m and
/// the per-AP noise covariance W_m^H W_m.
struct EffectiveInputs {
    int num_aps = 0;
    int num_users = 0;
    int rf_chains = 0;
    std::vector<CMat> Re; // index m * K + k, N_RF x N_RF
    std::vector<CMat> Cz; // index m

    const CMat& re(int m, int k) const { return Re.at(static_cast<std::size_t>(m * num_users + k)); }
    int stacked_dim() const noexcept { return num_aps * rf_chains; }
};

EffectiveInputs effective_inputs(const SpatialCorrelationSet& correlations, const AnalogPrecoder& precoder);

/// True effective channels h_ek = [W_1^H h_1k; ...; W_M^H h_Mk], one per user.
std::vector<CVec> effective_channels(const AnalogPrecoder& precoder, const ChannelRealization& channels);

/// N x tau_p unit-variance noise matrices Z_m, one per AP.
std::vector<CMat> draw_pilot_noise(int num_aps, int antennas, int pilot_len, std::uint64_t seed, std::uint64_t block_index);

/// y_em = vec(sqrt(P_p) W_m^H H_m Psi^T + W_m^H Z_m), stacked by pilot symbol
/// (length tau_p * N_RF). An empty `noise` means noiseless reception.
std::vector<CVec> receive_pilots(const AnalogPrecoder& precoder, const ChannelRealization& channels,
                                 const PilotBook& pilots, double pilot_power, const std::vector<CMat>& noise);

/// LMMSE effective-channel estimates of one coherence block, one stacked
/// M*N_RF vector per user.
struct EffectiveChannelEstimate {
    int num_aps = 0;
    int rf_chains = 0;
    std::vector<CVec> hhat;

    int num_users() const noexcept { return static_cast<int>(hhat.size()); }
};

/// Per-AP LMMSE filters. The pilot Gram (Psi_e R_em Psi_e^H P_p + I (x) W^H W)
/// is inverted once per AP, switching to the pseudo-inverse when its
/// condition number exceeds 1e10.
class LmmseEstimator {
public:
    LmmseEstimator(const EffectiveInputs& inputs, const PilotBook& pilots, double pilot_power);

    EffectiveChannelEstimate estimate(const std::vector<CVec>& received) const;

    /// P_p R_emk (psi_k^H (x) I) G_m (psi_k' (x) I) R_emk'.
    CMat cross_covariance(int m, int k, int kp) const;

    /// R_emk - Cov(hhat_mk), evaluated as
    /// R^1/2 (I + P_p R^1/2 S_k Q_k^-1 S_k^H R^1/2)^-1 R^1/2 with Q_k the
    /// pilot Gram without user k, so it stays PSD for strong users. Falls
    /// back to the plain difference on APs where the pseudo-inverse dropped
    /// eigenvalues, since the filter is then not the LMMSE one.
    CMat error_covariance(int m, int k) const;

    bool used_pseudo_inverse(int m) const { return pinv_.at(static_cast<std::size_t>(m)); }
    int num_aps() const noexcept { return num_aps_; }
    int num_users() const noexcept { return num_users_; }
    int rf_chains() const noexcept { return rf_chains_; }

private:
    int num_aps_ = 0;
    int num_users_ = 0;
    int rf_chains_ = 0;
    int pilot_len_ = 0;
    double pilot_power_ = 0.0;
    std::vector<CMat> gram_inverse_; // per AP, (tau_p N_RF)^2
    std::vector<CMat> gram_noise_;   // per AP, I (x) W^H W
    std::vector<CMat> selectors_;    // per user, psi_k^H (x) I_{N_RF}
    std::vector<CMat> filters_;      // per (m, k), N_RF x tau_p N_RF
    std::vector<CMat> Re_;
    std::vector<bool> pinv_;
    std::vector<bool> truncated_;
};

EffectiveChannelEstimate lmmse_estimate(const std::vector<CVec>& received, const EffectiveInputs& inputs,
                                        const PilotBook& pilots, double pilot_power);

/// Covariances of the estimates plus the uplink residual-interference matrix.
struct EffectiveChannelStatistics {
    int num_aps = 0;
    int num_users = 0;
    int rf_chains = 0;
    std::vector<BlockDiag> C;      // per user, Cov(hhat_k)
    std::vector<BlockDiag> Ccross; // index k * K + k', E[hhat_k hhat_k'^H]
    std::vector<BlockDiag> Re;     // per user, diag{R_emk}
    std::vector<BlockDiag> E;      // per user, Re_k - C_k
    BlockDiag Cz;                  // diag{W_m^H W_m}
    BlockDiag D;                   // sum_k P_k E_k + Cz for `powers`
    std::vector<double> powers;

    const BlockDiag& cross(int k, int kp) const { return Ccross.at(static_cast<std::size_t>(k * num_users + kp)); }
    int stacked_dim() const noexcept { return num_aps * rf_chains; }
};

EffectiveChannelStatistics estimate_covariances(const EffectiveInputs& inputs, const PilotBook& pilots,
                                                double pilot_power, std::span<const double> powers);
EffectiveChannelStatistics estimate_covariances(const LmmseEstimator& estimator, const EffectiveInputs& inputs,
                                                std::span<const double> powers);

/// D = sum_k P_k E_k + Cz for an arbitrary power vector (mW).
BlockDiag assemble_d(const EffectiveChannelStatistics& stats, std::span<const double> powers);

} // namespace cfhb
