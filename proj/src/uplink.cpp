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

#include "cfhb/uplink.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cfhb/errors.hpp"

namespace cfhb {

namespace {

void check_estimates(const EffectiveChannelEstimate& est, const BlockDiag& D, std::span<const double> powers)
{
    if (static_cast<std::size_t>(est.num_users()) != powers.size())
        throw DimensionError("uplink: estimate count does not match powers");
    for (const CVec& h : est.hhat)
        if (h.size() != D.dim())
            throw DimensionError("uplink: estimate length does not match D");
}

bool regular_blocks(const BlockDiag& D)
{
    for (const CMat& b : D.blocks()) {
        const HermitianEig eig = eig_descending(hermitian_part(b));
        if (eig.values.size() == 0)
            continue;
        const double lmax = eig.values.cwiseAbs().maxCoeff();
        const double lmin = eig.values.minCoeff();
        if (!(lmin > 0.0) || lmax > kPinvConditionLimit * lmin)
            return false;
    }
    return true;
}

// Omega x = b; Cholesky when D (the PD floor of Omega) is well conditioned,
// otherwise the shared pseudo-inverse rule.
CVec solve_omega(const CMat& omega, const CVec& b, bool regular)
{
    if (regular) {
        Eigen::LLT<CMat> llt(omega);
        if (llt.info() == Eigen::Success)
            return llt.solve(b);
    }
    return hermitian_solve(hermitian_part(omega), b);
}

CMat omega_matrix(const EffectiveChannelEstimate& est, const BlockDiag& D, std::span<const double> powers, int skip)
{
    CMat omega = D.dense();
    for (int k = 0; k < est.num_users(); ++k)
        if (k != skip && powers[static_cast<std::size_t>(k)] != 0.0)
            omega.selfadjointView<Eigen::Lower>().rankUpdate(est.hhat[static_cast<std::size_t>(k)],
                                                             powers[static_cast<std::size_t>(k)]);
    return omega.selfadjointView<Eigen::Lower>();
}

// P_k h_k^H Omega_k^-1 h_k without forming Omega_k: with D = L L^H and
// g_j = L^-1 h_j, Omega_k = L (I + G G^H) L^H where G holds sqrt(P_j) g_j,
// j != k, and I + G G^H = R^H R from a QR factor of [I; G^H]. The error then
// grows with the square root of the condition number of Omega_k rather than
// with the condition number itself. Returns false if a block of D is not
// positive definite.
bool whitened_sinr(const EffectiveChannelEstimate& est, const BlockDiag& D, std::span<const double> powers,
                   std::vector<double>& sinr)
{
    std::vector<Eigen::LLT<CMat>> chol;
    chol.reserve(D.num_blocks());
    for (const CMat& b : D.blocks()) {
        chol.emplace_back(b);
        if (chol.back().info() != Eigen::Success)
            return false;
    }
    const int K = est.num_users();
    const Eigen::Index n = D.dim();
    std::vector<CVec> g;
    g.reserve(static_cast<std::size_t>(K));
    for (const CVec& h : est.hhat) {
        CVec w(n);
        Eigen::Index off = 0;
        for (std::size_t m = 0; m < chol.size(); ++m) {
            const Eigen::Index b = D.block(m).rows();
            w.segment(off, b) = chol[m].matrixL().solve(h.segment(off, b));
            off += b;
        }
        g.push_back(std::move(w));
    }
    for (int k = 0; k < K; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        if (powers[ku] == 0.0)
            continue;
        Eigen::Index rows = n;
        for (int j = 0; j < K; ++j)
            if (j != k && powers[static_cast<std::size_t>(j)] != 0.0)
                ++rows;
        CMat A = CMat::Zero(rows, n);
        A.topRows(n).setIdentity();
        Eigen::Index r = n;
        for (int j = 0; j < K; ++j)
            if (j != k && powers[static_cast<std::size_t>(j)] != 0.0)
                A.row(r++) = std::sqrt(powers[static_cast<std::size_t>(j)]) * g[static_cast<std::size_t>(j)].adjoint();
        const Eigen::HouseholderQR<CMat> qr(A);
        const CMat R = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
        const CVec y = R.adjoint().triangularView<Eigen::Lower>().solve(g[ku]);
        sinr[ku] = powers[ku] * y.squaredNorm();
    }
    return true;
}

} // namespace

std::vector<CVec> mmse_combiner(const EffectiveChannelEstimate& estimates, const BlockDiag& D,
                                std::span<const double> powers)
{
    check_estimates(estimates, D, powers);
    const bool regular = regular_blocks(D);
    const CMat omega = omega_matrix(estimates, D, powers, -1);
    std::vector<CVec> v;
    v.reserve(estimates.hhat.size());
    for (const CVec& h : estimates.hhat)
        v.push_back(solve_omega(omega, h, regular));
    return v;
}

std::vector<CVec> mmse_combiner(const EffectiveChannelEstimate& estimates, const EffectiveChannelStatistics& stats,
                                std::span<const double> powers)
{
    return mmse_combiner(estimates, assemble_d(stats, powers), powers);
}

double combiner_sinr(const EffectiveChannelEstimate& estimates, const BlockDiag& D, std::span<const double> powers,
                     int k, const CVec& v)
{
    check_estimates(estimates, D, powers);
    const auto ku = static_cast<std::size_t>(k);
    const double signal = powers[ku] * std::norm(v.dot(estimates.hhat[ku]));
    double interference = D.apply(v).dot(v).real();
    for (std::size_t j = 0; j < estimates.hhat.size(); ++j)
        if (j != ku)
            interference += powers[j] * std::norm(v.dot(estimates.hhat[j]));
    if (interference <= 0.0)
        return signal > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    return signal / interference;
}

std::vector<double> uplink_sinr_exact(const EffectiveChannelEstimate& estimates, const BlockDiag& D,
                                      std::span<const double> powers)
{
    check_estimates(estimates, D, powers);
    const bool regular = regular_blocks(D);
    const int K = estimates.num_users();
    std::vector<double> sinr(static_cast<std::size_t>(K), 0.0);
    if (regular && whitened_sinr(estimates, D, powers, sinr))
        return sinr;
    for (int k = 0; k < K; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        if (powers[ku] == 0.0)
            continue;
        const CVec& h = estimates.hhat[ku];
        const CMat omega_k = omega_matrix(estimates, D, powers, k);
        sinr[ku] = std::max(0.0, powers[ku] * h.dot(solve_omega(omega_k, h, regular)).real());
    }
    return sinr;
}

std::vector<double> uplink_sinr_exact(const EffectiveChannelEstimate& estimates,
                                      const EffectiveChannelStatistics& stats, std::span<const double> powers)
{
    return uplink_sinr_exact(estimates, assemble_d(stats, powers), powers);
}

std::vector<double> uplink_sinr_exact_mean(std::span<const EffectiveChannelEstimate> batch,
                                           const EffectiveChannelStatistics& stats, std::span<const double> powers)
{
    if (batch.empty())
        throw ConfigError("uplink_sinr_exact_mean: empty batch");
    const BlockDiag D = assemble_d(stats, powers);
    std::vector<double> mean(powers.size(), 0.0);
    for (const EffectiveChannelEstimate& est : batch) {
        const std::vector<double> s = uplink_sinr_exact(est, D, powers);
        for (std::size_t k = 0; k < s.size(); ++k)
            mean[k] += s[k];
    }
    for (double& m : mean)
        m /= static_cast<double>(batch.size());
    return mean;
}

std::vector<double> uplink_sinr_approx1(const EffectiveChannelStatistics& stats, std::span<const double> powers)
{
    const std::size_t K = stats.C.size();
    if (powers.size() != K)
        throw DimensionError("uplink_sinr_approx1: powers do not match users");
    const BlockDiag Dinv = assemble_d(stats, powers).inverse();
    std::vector<double> tr(K);
    for (std::size_t k = 0; k < K; ++k)
        tr[k] = trace_product(stats.C[k], Dinv).real();
    std::vector<double> sinr(K, 0.0);
    for (std::size_t k = 0; k < K; ++k) {
        if (powers[k] == 0.0)
            continue;
        double s = powers[k] * tr[k];
        for (std::size_t j = 0; j < K; ++j) {
            if (j == k || powers[j] == 0.0)
                continue;
            const double cross = trace_product(stats.C[j], Dinv, stats.C[k], Dinv).real();
            s -= powers[k] * powers[j] * cross / (1.0 + powers[j] * tr[j]);
        }
        sinr[k] = s;
    }
    return sinr;
}

std::vector<double> uplink_sinr_approx2(const EffectiveChannelStatistics& stats, std::span<const double> powers,
                                        const FixedPointOptions& options)
{
    if (powers.size() != stats.C.size())
        throw DimensionError("uplink_sinr_approx2: powers do not match users");
    const BlockDiag D = assemble_d(stats, powers);
    const FixedPointSolution sol =
        solve_fixed_point(powers, stats.C, D, 0.0, static_cast<double>(stats.stacked_dim()), options);
    return sol.e;
}

MaxMinResult maxmin_power(const SinrFunction& sinr, std::span<const double> p0, double p_max,
                          const MaxMinOptions& options)
{
    if (p0.empty())
        throw ConfigError("maxmin_power: empty power vector");
    if (!(p_max > 0.0))
        throw ConfigError("maxmin_power: p_max must be positive");
    std::vector<double> p(p0.begin(), p0.end());
    for (double x : p)
        if (!(x > 0.0) || !std::isfinite(x))
            throw ConfigError("maxmin_power: initial powers must be positive");
    const double top = *std::max_element(p.begin(), p.end());
    for (double& x : p)
        x /= top;

    auto evaluate = [&](const std::vector<double>& pn) {
        std::vector<double> mw(pn.size());
        for (std::size_t k = 0; k < pn.size(); ++k)
            mw[k] = pn[k] * p_max;
        std::vector<double> s = sinr(mw);
        if (s.size() != pn.size())
            throw DimensionError("maxmin_power: SINR function returned wrong length");
        return s;
    };

    MaxMinResult out;
    for (int it = 1; it <= options.max_iterations; ++it) {
        const std::vector<double> s = evaluate(p);
        std::vector<double> q(p.size());
        for (std::size_t k = 0; k < p.size(); ++k) {
            if (!(s[k] > 0.0))
                throw NumericalError("maxmin_power: SINR of user " + std::to_string(k) +
                                     " is not positive at positive power");
            q[k] = p[k] / s[k];
        }
        const double qmax = *std::max_element(q.begin(), q.end());
        double delta = 0.0;
        for (std::size_t k = 0; k < p.size(); ++k) {
            q[k] /= qmax;
            delta = std::max(delta, std::abs(q[k] - p[k]) / p[k]);
        }
        p = std::move(q);
        out.iterations = it;
        if (delta < options.tolerance) {
            out.converged = true;
            break;
        }
    }
    out.sinr = evaluate(p);
    out.powers.resize(p.size());
    for (std::size_t k = 0; k < p.size(); ++k)
        out.powers[k] = p[k] * p_max;
    out.p = std::move(p);
    const auto [lo, hi] = std::minmax_element(out.sinr.begin(), out.sinr.end());
    out.min_sinr = *lo;
    out.spread = *lo > 0.0 ? (*hi - *lo) / *lo : std::numeric_limits<double>::infinity();
    return out;
}

std::vector<double> uplink_rate(std::span<const double> sinr, const ScenarioConfig& config)
{
    return spectral_efficiency(sinr, config.se_prefactor());
}

} // namespace cfhb
