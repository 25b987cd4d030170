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

#include "cfhb/downlink.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cfhb/errors.hpp"
#include "cfhb/parallel.hpp"

namespace cfhb {

std::vector<CVec> rzf_precoder(const EffectiveChannelEstimate& estimates, double rho)
{
    if (!(rho > 0.0))
        throw ConfigError("rzf_precoder: rho must be positive");
    const int K = estimates.num_users();
    if (K == 0)
        return {};
    const Eigen::Index n = estimates.hhat.front().size();
    CMat H(n, K);
    for (int k = 0; k < K; ++k) {
        if (estimates.hhat[static_cast<std::size_t>(k)].size() != n)
            throw DimensionError("rzf_precoder: estimates differ in length");
        H.col(k) = estimates.hhat[static_cast<std::size_t>(k)];
    }
    CMat omega = CMat::Identity(n, n) * rho;
    omega.selfadjointView<Eigen::Lower>().rankUpdate(H);
    Eigen::LLT<CMat> llt(omega.selfadjointView<Eigen::Lower>());
    if (llt.info() != Eigen::Success)
        throw NumericalError("rzf_precoder: factorization failed");
    const CMat V = llt.solve(H);
    std::vector<CVec> out;
    out.reserve(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k)
        out.push_back(V.col(k));
    return out;
}

DlPrecoderSet normalize_precoder(RMat second_moments, double rho)
{
    DlPrecoderSet out;
    out.nu.resize(static_cast<std::size_t>(second_moments.cols()));
    for (Eigen::Index k = 0; k < second_moments.cols(); ++k) {
        const double peak = second_moments.col(k).maxCoeff();
        if (!(peak > 0.0))
            throw NumericalError("normalize_precoder: all-zero precoder for user " + std::to_string(k));
        out.nu[static_cast<std::size_t>(k)] = std::sqrt(peak);
    }
    out.second_moments = std::move(second_moments);
    out.rho = rho;
    return out;
}

DlPrecoderSet normalize_precoder(const std::vector<std::vector<CVec>>& samples, int num_aps, int rf_chains,
                                 double rho)
{
    if (samples.empty())
        throw ConfigError("normalize_precoder: no realizations");
    const std::size_t K = samples.front().size();
    RMat moments = RMat::Zero(num_aps, static_cast<Eigen::Index>(K));
    for (const std::vector<CVec>& v : samples) {
        if (v.size() != K)
            throw DimensionError("normalize_precoder: realizations differ in user count");
        for (std::size_t k = 0; k < K; ++k) {
            if (v[k].size() != static_cast<Eigen::Index>(num_aps) * rf_chains)
                throw DimensionError("normalize_precoder: precoder length is not M * N_RF");
            for (int m = 0; m < num_aps; ++m)
                moments(m, static_cast<Eigen::Index>(k)) +=
                    v[k].segment(static_cast<Eigen::Index>(m) * rf_chains, rf_chains).squaredNorm();
        }
    }
    moments /= static_cast<double>(samples.size());
    return normalize_precoder(std::move(moments), rho);
}

namespace {

struct TrialMoments {
    RMat norms; // M x K, ||vhat_mk||^2
    CMat gains; // (k, k') = h_k^H vhat_k'
};

} // namespace

DlMonteCarlo downlink_sinr_exact_mc(const DlTrialSource& source, int num_aps, int rf_chains,
                                    std::span<const double> dl_powers, double rho, int trials)
{
    if (trials < 1)
        throw ConfigError("downlink_sinr_exact_mc: trials must be positive");
    const auto K = static_cast<Eigen::Index>(dl_powers.size());
    std::vector<TrialMoments> per_trial(static_cast<std::size_t>(trials));
    parallel_for(per_trial.size(), [&](std::size_t t) {
        const BlockSample sample = source(static_cast<std::uint64_t>(t));
        if (static_cast<Eigen::Index>(sample.h.size()) != K || sample.estimate.num_users() != K)
            throw DimensionError("downlink_sinr_exact_mc: sample user count does not match powers");
        const std::vector<CVec> v = rzf_precoder(sample.estimate, rho);
        TrialMoments& out = per_trial[t];
        out.norms.resize(num_aps, K);
        out.gains.resize(K, K);
        for (Eigen::Index k = 0; k < K; ++k) {
            const CVec& vk = v[static_cast<std::size_t>(k)];
            for (int m = 0; m < num_aps; ++m)
                out.norms(m, k) = vk.segment(static_cast<Eigen::Index>(m) * rf_chains, rf_chains).squaredNorm();
            for (Eigen::Index j = 0; j < K; ++j)
                out.gains(j, k) = sample.h[static_cast<std::size_t>(j)].dot(vk);
        }
    });

    RMat norms = RMat::Zero(num_aps, K);
    CVec mean_gain = CVec::Zero(K);
    RMat power = RMat::Zero(K, K);
    for (const TrialMoments& tm : per_trial) {
        norms += tm.norms;
        mean_gain += tm.gains.diagonal();
        power += tm.gains.cwiseAbs2();
    }
    const double T = static_cast<double>(trials);
    norms /= T;
    mean_gain /= T;
    power /= T;

    DlMonteCarlo out;
    out.trials = trials;
    out.precoder = normalize_precoder(std::move(norms), rho);
    out.signal.resize(static_cast<std::size_t>(K));
    out.variance.resize(static_cast<std::size_t>(K));
    out.sinr.resize(static_cast<std::size_t>(K));
    out.interference = RMat::Zero(K, K);
    for (Eigen::Index kp = 0; kp < K; ++kp) {
        const double nu2 = std::pow(out.precoder.nu[static_cast<std::size_t>(kp)], 2);
        out.interference.col(kp) = power.col(kp) / nu2;
    }
    for (Eigen::Index k = 0; k < K; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        const double nu2 = out.precoder.nu[ku] * out.precoder.nu[ku];
        out.signal[ku] = std::norm(mean_gain[k]) / nu2;
        out.variance[ku] = std::max(0.0, out.interference(k, k) - out.signal[ku]);
        double denom = 1.0 + dl_powers[ku] * out.variance[ku];
        for (Eigen::Index j = 0; j < K; ++j)
            if (j != k)
                denom += dl_powers[static_cast<std::size_t>(j)] * out.interference(k, j);
        out.sinr[ku] = dl_powers[ku] * out.signal[ku] / denom;
    }
    return out;
}

DlMonteCarlo downlink_sinr_exact_mc(const Deployment& deployment, std::span<const double> dl_powers, int trials)
{
    if (trials < 100)
        throw ConfigError("downlink_sinr_exact_mc: at least 100 trials required");
    const ScenarioConfig& c = deployment.config();
    return downlink_sinr_exact_mc([&](std::uint64_t t) { return deployment.draw_block(t); }, c.num_aps,
                                  c.rf_chains, dl_powers, c.rho(), trials);
}

DlApproximation downlink_sinr_approx(const EffectiveChannelStatistics& stats, std::span<const double> dl_powers,
                                     double rho, const FixedPointOptions& options)
{
    if (!(rho > 0.0))
        throw ConfigError("downlink_sinr_approx: rho must be positive");
    const std::size_t K = stats.C.size();
    if (dl_powers.size() != K || stats.E.size() != K)
        throw DimensionError("downlink_sinr_approx: powers do not match users");
    const auto Ki = static_cast<Eigen::Index>(K);
    const double n = static_cast<double>(stats.stacked_dim());
    const std::vector<double> ones(K, 1.0);
    const BlockDiag zero = BlockDiag::zeros(static_cast<std::size_t>(stats.num_aps), stats.rf_chains);
    const BlockDiag eye = BlockDiag::identity(static_cast<std::size_t>(stats.num_aps), stats.rf_chains);

    const FixedPointSolution S = solve_fixed_point(ones, stats.C, zero, rho, n, options);
    const DerivativeEquivalent Sp = solve_derivative(S, eye, ones, stats.C, n);

    DlApproximation out;
    out.e = S.e;
    out.nu2.resize(K);
    out.alpha.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
        const double e = S.e[k];
        double peak = 0.0;
        for (std::size_t m = 0; m < static_cast<std::size_t>(stats.num_aps); ++m)
            peak = std::max(peak, (stats.C[k].block(m) * Sp.Tprime.block(m)).trace().real());
        out.nu2[k] = peak / (n * n * (1.0 + e) * (1.0 + e));
        if (!(out.nu2[k] > 0.0))
            throw NumericalError("downlink_sinr_approx: zero precoder normalization for user " + std::to_string(k));
        out.alpha[k] = std::pow(e / (1.0 + e), 2) / out.nu2[k];
    }

    out.beta = RMat::Zero(Ki, Ki);
    for (std::size_t kp = 0; kp < K; ++kp) {
        const DerivativeEquivalent Skp = solve_derivative(S, stats.C[kp], ones, stats.C, n);
        const double scale = out.nu2[kp] * n * n * std::pow(1.0 + S.e[kp], 2);
        for (std::size_t k = 0; k < K; ++k) {
            if (k == kp)
                continue;
            const double tr_err = trace_product(stats.E[k], Skp.Tprime).real();
            const double tr_c = trace_product(stats.C[k], Skp.Tprime).real();
            const double bracket = tr_err + tr_c / std::pow(1.0 + S.e[k], 2);
            out.beta(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(kp)) = bracket / scale;
        }
    }

    out.sinr.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
        double denom = 1.0;
        for (std::size_t j = 0; j < K; ++j)
            if (j != k)
                denom += dl_powers[j] * out.beta(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j));
        out.sinr[k] = dl_powers[k] * out.alpha[k] / denom;
    }
    return out;
}

std::vector<double> downlink_rate(std::span<const double> sinr, const ScenarioConfig& config)
{
    return spectral_efficiency(sinr, config.se_prefactor());
}

} // namespace cfhb
