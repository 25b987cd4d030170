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

#include "cfhb/estimation.hpp"

#include <cmath>
#include <numbers>

#include "cfhb/errors.hpp"
#include "cfhb/rng.hpp"

namespace cfhb {

PilotBook generate_pilots(PilotKind kind, int pilot_len, int num_users, std::uint64_t seed)
{
    if (pilot_len < 1 || num_users < 1)
        throw ConfigError("generate_pilots: pilot_len and num_users must be positive");
    PilotBook book;
    book.kind = kind;
    book.psi.resize(pilot_len, num_users);
    if (kind == PilotKind::Orthogonal) {
        if (pilot_len < num_users)
            throw ConfigError("generate_pilots: orthogonal pilots need pilot_len >= num_users");
        for (int k = 0; k < num_users; ++k)
            for (int i = 0; i < pilot_len; ++i)
                book.psi(i, k) = std::polar(1.0, -2.0 * std::numbers::pi * i * k / pilot_len);
        return book;
    }
    RandomStream rng(derive_seed(seed, {tag(StreamTag::Pilots)}));
    for (int k = 0; k < num_users; ++k)
        for (int i = 0; i < pilot_len; ++i)
            book.psi(i, k) = rng.unit_phase();
    return book;
}

PilotBook generate_pilots(const ScenarioConfig& config, std::uint64_t seed)
{
    return generate_pilots(config.pilot_kind, config.pilot_len, config.num_users, seed);
}

EffectiveInputs effective_inputs(const SpatialCorrelationSet& correlations, const AnalogPrecoder& precoder)
{
    if (static_cast<int>(precoder.W.size()) != correlations.num_aps)
        throw DimensionError("effective_inputs: precoder/AP count mismatch");
    EffectiveInputs in;
    in.num_aps = correlations.num_aps;
    in.num_users = correlations.num_users;
    in.rf_chains = precoder.allocation.rf_chains;
    in.Re.reserve(correlations.R.size());
    for (int m = 0; m < in.num_aps; ++m) {
        const CMat& W = precoder.W[static_cast<std::size_t>(m)];
        for (int k = 0; k < in.num_users; ++k)
            in.Re.push_back(effective_correlation(correlations.at(m, k), W));
        CMat cz = W.adjoint() * W;
        in.Cz.push_back(hermitian_part(cz));
    }
    return in;
}

std::vector<CVec> effective_channels(const AnalogPrecoder& precoder, const ChannelRealization& channels)
{
    const int M = channels.num_aps;
    const int K = channels.num_users;
    const int nrf = precoder.allocation.rf_chains;
    std::vector<CVec> out(static_cast<std::size_t>(K), CVec(M * nrf));
    for (int m = 0; m < M; ++m) {
        const CMat& W = precoder.W.at(static_cast<std::size_t>(m));
        for (int k = 0; k < K; ++k)
            out[static_cast<std::size_t>(k)].segment(m * nrf, nrf) = W.adjoint() * channels.at(m, k);
    }
    return out;
}

std::vector<CMat> draw_pilot_noise(int num_aps, int antennas, int pilot_len, std::uint64_t seed, std::uint64_t block_index)
{
    std::vector<CMat> z;
    z.reserve(static_cast<std::size_t>(num_aps));
    for (int m = 0; m < num_aps; ++m) {
        RandomStream rng(derive_seed(seed, {tag(StreamTag::Noise), block_index, static_cast<std::uint64_t>(m)}));
        z.push_back(rng.complex_normal_matrix(antennas, pilot_len));
    }
    return z;
}

std::vector<CVec> receive_pilots(const AnalogPrecoder& precoder, const ChannelRealization& channels,
                                 const PilotBook& pilots, double pilot_power, const std::vector<CMat>& noise)
{
    const int M = channels.num_aps;
    const int K = channels.num_users;
    if (pilots.num_users() != K || static_cast<int>(precoder.W.size()) != M)
        throw DimensionError("receive_pilots: pilot/precoder shapes do not match the channels");
    if (!noise.empty() && static_cast<int>(noise.size()) != M)
        throw DimensionError("receive_pilots: one noise matrix per AP expected");
    const double amp = std::sqrt(pilot_power);
    std::vector<CVec> out;
    out.reserve(static_cast<std::size_t>(M));
    for (int m = 0; m < M; ++m) {
        const CMat& W = precoder.W[static_cast<std::size_t>(m)];
        CMat H(W.rows(), K);
        for (int k = 0; k < K; ++k)
            H.col(k) = channels.at(m, k);
        CMat Y = amp * (W.adjoint() * H) * pilots.psi.transpose();
        if (!noise.empty()) {
            const CMat& Z = noise[static_cast<std::size_t>(m)];
            if (Z.rows() != W.rows() || Z.cols() != pilots.length())
                throw DimensionError("receive_pilots: noise matrix must be N x tau_p");
            Y += W.adjoint() * Z;
        }
        out.push_back(Eigen::Map<const CVec>(Y.data(), Y.size()));
    }
    return out;
}

// ---------------------------------------------------------------------------

LmmseEstimator::LmmseEstimator(const EffectiveInputs& inputs, const PilotBook& pilots, double pilot_power)
    : num_aps_(inputs.num_aps), num_users_(inputs.num_users), rf_chains_(inputs.rf_chains),
      pilot_len_(pilots.length()), pilot_power_(pilot_power), Re_(inputs.Re)
{
    if (pilots.num_users() != num_users_)
        throw DimensionError("LmmseEstimator: pilot book has the wrong number of users");
    if (pilot_power < 0.0)
        throw ConfigError("LmmseEstimator: negative pilot power");
    const int nrf = rf_chains_;
    const int tp = pilot_len_;
    const Eigen::Index dim = static_cast<Eigen::Index>(tp) * nrf;

    selectors_.reserve(static_cast<std::size_t>(num_users_));
    for (int k = 0; k < num_users_; ++k) {
        CMat s = CMat::Zero(nrf, dim);
        for (int i = 0; i < tp; ++i)
            s.block(0, static_cast<Eigen::Index>(i) * nrf, nrf, nrf) = std::conj(pilots.psi(i, k)) * CMat::Identity(nrf, nrf);
        selectors_.push_back(std::move(s));
    }

    const double amp = std::sqrt(pilot_power);
    for (int m = 0; m < num_aps_; ++m) {
        CMat noise = CMat::Zero(dim, dim);
        for (int i = 0; i < tp; ++i)
            noise.block(static_cast<Eigen::Index>(i) * nrf, static_cast<Eigen::Index>(i) * nrf, nrf, nrf) =
                inputs.Cz[static_cast<std::size_t>(m)];
        CMat gram = noise;
        for (int k = 0; k < num_users_; ++k) {
            const CMat& s = selectors_[static_cast<std::size_t>(k)];
            gram += pilot_power * (s.adjoint() * inputs.re(m, k) * s);
        }
        gram = hermitian_part(gram);
        gram_noise_.push_back(std::move(noise));
        bool pinv = false;
        gram_inverse_.push_back(hermitian_inverse(gram, &pinv));
        pinv_.push_back(pinv);
        const RVec ev = eig_descending(gram).values;
        truncated_.push_back(pinv && ev.size() > 0 && ev.minCoeff() <= kPinvCutoff * ev.cwiseAbs().maxCoeff());
        for (int k = 0; k < num_users_; ++k)
            filters_.push_back(amp * inputs.re(m, k) * selectors_[static_cast<std::size_t>(k)] * gram_inverse_.back());
    }
}

EffectiveChannelEstimate LmmseEstimator::estimate(const std::vector<CVec>& received) const
{
    if (static_cast<int>(received.size()) != num_aps_)
        throw DimensionError("lmmse_estimate: one received vector per AP expected");
    EffectiveChannelEstimate est;
    est.num_aps = num_aps_;
    est.rf_chains = rf_chains_;
    est.hhat.assign(static_cast<std::size_t>(num_users_), CVec::Zero(num_aps_ * rf_chains_));
    for (int m = 0; m < num_aps_; ++m) {
        const CVec& y = received[static_cast<std::size_t>(m)];
        if (y.size() != static_cast<Eigen::Index>(pilot_len_) * rf_chains_)
            throw DimensionError("lmmse_estimate: received vector must have length tau_p * N_RF");
        for (int k = 0; k < num_users_; ++k)
            est.hhat[static_cast<std::size_t>(k)].segment(m * rf_chains_, rf_chains_) =
                filters_[static_cast<std::size_t>(m * num_users_ + k)] * y;
    }
    return est;
}

CMat LmmseEstimator::cross_covariance(int m, int k, int kp) const
{
    const CMat& G = gram_inverse_.at(static_cast<std::size_t>(m));
    const CMat& Rk = Re_.at(static_cast<std::size_t>(m * num_users_ + k));
    const CMat& Rkp = Re_.at(static_cast<std::size_t>(m * num_users_ + kp));
    return pilot_power_ * Rk * selectors_[static_cast<std::size_t>(k)] * G *
           selectors_[static_cast<std::size_t>(kp)].adjoint() * Rkp;
}

CMat LmmseEstimator::error_covariance(int m, int k) const
{
    const CMat& Rk = Re_.at(static_cast<std::size_t>(m * num_users_ + k));
    if (truncated_.at(static_cast<std::size_t>(m)))
        return hermitian_part(Rk - cross_covariance(m, k, k));
    CMat q = gram_noise_.at(static_cast<std::size_t>(m));
    for (int j = 0; j < num_users_; ++j) {
        if (j == k)
            continue;
        const CMat& s = selectors_[static_cast<std::size_t>(j)];
        q += pilot_power_ * (s.adjoint() * Re_[static_cast<std::size_t>(m * num_users_ + j)] * s);
    }
    const Eigen::LLT<CMat> llt(hermitian_part(q));
    if (llt.info() != Eigen::Success)
        return hermitian_part(Rk - cross_covariance(m, k, k));
    const CMat root = hermitian_sqrt(Rk);
    const CMat a = selectors_[static_cast<std::size_t>(k)].adjoint() * root;
    const CMat x = pilot_power_ * (a.adjoint() * llt.solve(a));
    const Eigen::Index r = Rk.rows();
    const CMat inner = hermitian_part(CMat::Identity(r, r) + x).llt().solve(root);
    return hermitian_part(root * inner);
}

EffectiveChannelEstimate lmmse_estimate(const std::vector<CVec>& received, const EffectiveInputs& inputs,
                                        const PilotBook& pilots, double pilot_power)
{
    return LmmseEstimator(inputs, pilots, pilot_power).estimate(received);
}

// ---------------------------------------------------------------------------

BlockDiag assemble_d(const EffectiveChannelStatistics& stats, std::span<const double> powers)
{
    if (static_cast<int>(powers.size()) != stats.num_users)
        throw DimensionError("assemble_d: one power per user expected");
    BlockDiag d = stats.Cz;
    for (int k = 0; k < stats.num_users; ++k) {
        const double p = powers[static_cast<std::size_t>(k)];
        if (p == 0.0)
            continue;
        d += p * stats.E[static_cast<std::size_t>(k)];
    }
    for (std::size_t m = 0; m < d.num_blocks(); ++m) {
        CMat& b = d.block(m);
        b = hermitian_part(b);
    }
    return d;
}

EffectiveChannelStatistics estimate_covariances(const LmmseEstimator& estimator, const EffectiveInputs& inputs,
                                                std::span<const double> powers)
{
    const int M = inputs.num_aps;
    const int K = inputs.num_users;
    if (static_cast<int>(powers.size()) != K)
        throw DimensionError("estimate_covariances: one power per user expected");
    EffectiveChannelStatistics s;
    s.num_aps = M;
    s.num_users = K;
    s.rf_chains = inputs.rf_chains;
    s.powers.assign(powers.begin(), powers.end());

    s.Ccross.reserve(static_cast<std::size_t>(K * K));
    for (int k = 0; k < K; ++k) {
        for (int kp = 0; kp < K; ++kp) {
            std::vector<CMat> blocks;
            blocks.reserve(static_cast<std::size_t>(M));
            for (int m = 0; m < M; ++m) {
                CMat c = estimator.cross_covariance(m, k, kp);
                if (k == kp)
                    c = hermitian_part(c);
                blocks.push_back(std::move(c));
            }
            s.Ccross.emplace_back(std::move(blocks));
        }
    }
    for (int k = 0; k < K; ++k) {
        s.C.push_back(s.cross(k, k));
        std::vector<CMat> re;
        for (int m = 0; m < M; ++m)
            re.push_back(inputs.re(m, k));
        s.Re.emplace_back(std::move(re));
        std::vector<CMat> err;
        for (int m = 0; m < M; ++m)
            err.push_back(estimator.error_covariance(m, k));
        s.E.emplace_back(std::move(err));
    }
    s.Cz = BlockDiag(inputs.Cz);
    s.D = assemble_d(s, powers);
    return s;
}

EffectiveChannelStatistics estimate_covariances(const EffectiveInputs& inputs, const PilotBook& pilots,
                                                double pilot_power, std::span<const double> powers)
{
    return estimate_covariances(LmmseEstimator(inputs, pilots, pilot_power), inputs, powers);
}

} // namespace cfhb
