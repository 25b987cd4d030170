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

#include "cfhb/rmt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cfhb/errors.hpp"
#include "cfhb/rng.hpp"

namespace cfhb {

namespace {

void check_inputs(std::span<const double> weights, const std::vector<BlockDiag>& C, const BlockDiag& ref,
                  double n, const char* who)
{
    if (weights.size() != C.size())
        throw DimensionError(std::string(who) + ": weights and covariances differ in length");
    for (const BlockDiag& c : C)
        if (!c.conforms(ref))
            throw DimensionError(std::string(who) + ": covariance shape mismatch");
    if (!(n > 0.0))
        throw ConfigError(std::string(who) + ": normalization n must be positive");
    for (double w : weights)
        if (!(w >= 0.0) || !std::isfinite(w))
            throw ConfigError(std::string(who) + ": weights must be finite and non-negative");
}

BlockDiag resolvent(std::span<const double> weights, const std::vector<BlockDiag>& C, const BlockDiag& S0, double z,
                    double n, const std::vector<double>& e)
{
    BlockDiag inv = S0;
    inv *= 1.0 / n;
    const Eigen::Index b = S0.block_size();
    for (std::size_t m = 0; m < S0.num_blocks(); ++m) {
        CMat& blk = inv.block(m);
        blk += CMat::Identity(b, b) * (z / n);
        for (std::size_t k = 0; k < C.size(); ++k)
            if (weights[k] > 0.0)
                blk += C[k].block(m) * (weights[k] / (n * (1.0 + e[k])));
    }
    BlockDiag T = S0;
    for (std::size_t m = 0; m < S0.num_blocks(); ++m)
        T.block(m) = hermitian_inverse(hermitian_part(inv.block(m)));
    return T;
}

std::vector<double> update(std::span<const double> weights, const std::vector<BlockDiag>& C, const BlockDiag& T,
                           double n)
{
    std::vector<double> out(C.size(), 0.0);
    for (std::size_t k = 0; k < C.size(); ++k)
        if (weights[k] > 0.0)
            out[k] = std::max(0.0, weights[k] / n * trace_product(C[k], T).real());
    return out;
}

double relative_residual(const std::vector<double>& e, const std::vector<double>& next)
{
    double r = 0.0;
    for (std::size_t k = 0; k < e.size(); ++k)
        r = std::max(r, std::abs(next[k] - e[k]) / (1.0 + e[k]));
    return r;
}

RMat fixed_point_jacobian(std::span<const double> weights, const std::vector<BlockDiag>& C, const BlockDiag& T,
                          const std::vector<double>& e, double n)
{
    const auto K = static_cast<Eigen::Index>(C.size());
    RMat J = RMat::Zero(K, K);
    std::vector<BlockDiag> ct;
    ct.reserve(C.size());
    for (const BlockDiag& c : C)
        ct.push_back(c * T);
    for (Eigen::Index k = 0; k < K; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        if (weights[ku] == 0.0)
            continue;
        for (Eigen::Index j = 0; j < K; ++j) {
            const auto ju = static_cast<std::size_t>(j);
            if (weights[ju] == 0.0)
                continue;
            J(k, j) = weights[ku] * weights[ju] * trace_product(ct[ku], ct[ju]).real() /
                      (n * n * (1.0 + e[ju]) * (1.0 + e[ju]));
        }
    }
    return J;
}

} // namespace

FixedPointSolution solve_fixed_point(std::span<const double> weights, const std::vector<BlockDiag>& C,
                                     const BlockDiag& S0, double z, double n, const FixedPointOptions& options)
{
    check_inputs(weights, C, S0, n, "solve_fixed_point");
    if (!(z >= 0.0))
        throw ConfigError("solve_fixed_point: z must be non-negative");

    struct Iterate {
        std::vector<double> e;
        BlockDiag T;
        std::vector<double> fe;
        double residual = 0.0;
    };
    auto evaluate = [&](std::vector<double> e) {
        Iterate it;
        it.T = resolvent(weights, C, S0, z, n, e);
        it.fe = update(weights, C, it.T, n);
        it.residual = relative_residual(e, it.fe);
        it.e = std::move(e);
        return it;
    };

    const std::size_t K = C.size();
    const auto Ki = static_cast<Eigen::Index>(K);
    std::vector<double> start(K);
    for (std::size_t k = 0; k < K; ++k)
        start[k] = weights[k] > 0.0 ? 1.0 : 0.0;
    Iterate cur = evaluate(std::move(start));

    FixedPointSolution sol;
    bool finishing = false;
    bool damped = false;
    int increases = 0;
    for (int it = 1; it <= options.max_iterations; ++it) {
        if (!std::isfinite(cur.residual))
            throw NumericalError("solve_fixed_point: non-finite iterate", cur.residual);
        if (cur.residual <= options.tolerance && (finishing || !options.newton))
            break;
        finishing = cur.residual <= options.tolerance;
        sol.iterations = it;

        // Newton on e - f(e) = 0 (the Jacobian of f is the J matrix of the
        // derivative equivalent), kept only when it lowers the residual.
        bool accepted = false;
        if (options.newton && Ki > 0) {
            const RMat J = fixed_point_jacobian(weights, C, cur.T, cur.e, n);
            RVec rhs(Ki);
            for (std::size_t k = 0; k < K; ++k)
                rhs[static_cast<Eigen::Index>(k)] = cur.fe[k] - cur.e[k];
            const RVec delta = (RMat::Identity(Ki, Ki) - J).partialPivLu().solve(rhs);
            for (double step = 1.0; step >= 0.125 && !accepted && delta.allFinite(); step *= 0.5) {
                std::vector<double> cand(K);
                bool valid = true;
                for (std::size_t k = 0; k < K; ++k) {
                    cand[k] = cur.e[k] + step * delta[static_cast<Eigen::Index>(k)];
                    valid = valid && cand[k] >= 0.0;
                }
                if (!valid)
                    continue;
                Iterate next = evaluate(std::move(cand));
                if (next.residual < cur.residual) {
                    cur = std::move(next);
                    accepted = true;
                }
            }
        }
        if (!accepted) {
            std::vector<double> target = cur.fe;
            if (damped)
                for (std::size_t k = 0; k < K; ++k)
                    target[k] = 0.5 * (cur.e[k] + cur.fe[k]);
            Iterate next = evaluate(std::move(target));
            if (finishing && !(next.residual < cur.residual))
                break;
            if (next.residual > cur.residual && ++increases >= 2)
                damped = true;
            cur = std::move(next);
        }
    }
    if (!(cur.residual <= options.tolerance))
        throw NumericalError("solve_fixed_point: no convergence after " + std::to_string(options.max_iterations) +
                                 " iterations",
                             cur.residual);
    sol.e = std::move(cur.e);
    sol.T = std::move(cur.T);
    sol.residual = cur.residual;
    sol.damped = damped;
    return sol;
}

DerivativeEquivalent solve_derivative(const FixedPointSolution& solution, const BlockDiag& theta,
                                      std::span<const double> weights, const std::vector<BlockDiag>& C, double n)
{
    const BlockDiag& T = solution.T;
    check_inputs(weights, C, T, n, "solve_derivative");
    if (!theta.conforms(T))
        throw DimensionError("solve_derivative: Theta shape mismatch");
    if (solution.e.size() != C.size())
        throw DimensionError("solve_derivative: solution does not match covariances");

    const std::size_t K = C.size();
    const auto Ki = static_cast<Eigen::Index>(K);
    const std::vector<double>& e = solution.e;

    DerivativeEquivalent out;
    const BlockDiag tthetat = T * theta * T;
    out.v = RVec::Zero(Ki);
    for (std::size_t k = 0; k < K; ++k)
        if (weights[k] > 0.0)
            out.v[static_cast<Eigen::Index>(k)] = weights[k] / n * trace_product(C[k], tthetat).real();
    out.J = fixed_point_jacobian(weights, C, T, e, n);

    out.spectral_radius = Ki == 0 ? 0.0 : out.J.eigenvalues().cwiseAbs().maxCoeff();
    if (!(out.spectral_radius < 1.0))
        throw NumericalError("solve_derivative: spectral radius of J is not below 1", out.spectral_radius);

    RVec ep = RVec::Zero(Ki);
    if (Ki > 0)
        ep = (RMat::Identity(Ki, Ki) - out.J).partialPivLu().solve(out.v);
    out.eprime.assign(ep.data(), ep.data() + Ki);

    BlockDiag mid = BlockDiag::zeros(T.num_blocks(), T.block_size());
    for (std::size_t k = 0; k < K; ++k)
        if (weights[k] > 0.0)
            mid += (weights[k] * out.eprime[k] / (n * (1.0 + e[k]) * (1.0 + e[k]))) * C[k];
    out.Tprime = tthetat + T * mid * T;
    for (std::size_t m = 0; m < out.Tprime.num_blocks(); ++m)
        out.Tprime.block(m) = hermitian_part(out.Tprime.block(m));
    return out;
}

RankOneSides rank_one_update_identity(const CMat& U, const CVec& x, double c)
{
    if (U.rows() != U.cols() || U.rows() != x.size())
        throw DimensionError("rank_one_update_identity: shape mismatch");
    const CMat updated = U + c * x * x.adjoint();
    Eigen::FullPivLU<CMat> lu_u(U);
    Eigen::FullPivLU<CMat> lu_updated(updated);
    if (!lu_u.isInvertible() || !lu_updated.isInvertible())
        throw NumericalError("rank_one_update_identity: singular input");
    RankOneSides out;
    // x^H M^-1 as a column: (M^-H x)^H; store the conjugate-transposed rows.
    out.lhs = lu_updated.inverse().adjoint() * x;
    const CVec ux = lu_u.inverse().adjoint() * x;
    const cplx denom = 1.0 + c * x.dot(lu_u.solve(x));
    out.rhs = ux / std::conj(denom);
    return out;
}

TraceLemmaStats trace_lemma_oracle(const CMat& A, int trials, std::uint64_t seed)
{
    if (A.rows() != A.cols())
        throw DimensionError("trace_lemma_oracle: matrix is not square");
    if (trials < 1)
        throw ConfigError("trace_lemma_oracle: trials must be positive");
    const Eigen::Index n = A.rows();
    const double var = 1.0 / static_cast<double>(n);
    const cplx target = A.trace() / static_cast<double>(n);
    RandomStream rng(derive_seed(seed, {tag(StreamTag::Oracle)}));
    std::vector<double> quad(static_cast<std::size_t>(trials));
    std::vector<double> cross(static_cast<std::size_t>(trials));
    for (int t = 0; t < trials; ++t) {
        const CVec x = rng.complex_normal_vector(n, var);
        const CVec y = rng.complex_normal_vector(n, var);
        const CVec ax = A * x;
        quad[static_cast<std::size_t>(t)] = std::abs(x.dot(ax) - target);
        cross[static_cast<std::size_t>(t)] = std::abs(y.dot(ax));
    }
    auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        const std::size_t h = v.size() / 2;
        return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
    };
    TraceLemmaStats s;
    s.n = static_cast<int>(n);
    s.trials = trials;
    s.median_quadratic = median(quad);
    s.max_quadratic = *std::max_element(quad.begin(), quad.end());
    s.median_cross = median(cross);
    s.max_cross = *std::max_element(cross.begin(), cross.end());
    return s;
}

double trace_perturbation(const CMat& A, const CMat& B, const CVec& v)
{
    if (A.rows() != A.cols() || B.rows() != B.cols() || A.rows() != B.rows() || v.size() != A.rows())
        throw DimensionError("trace_perturbation: shape mismatch");
    const double n = static_cast<double>(A.rows());
    const CMat b1 = hermitian_inverse(B);
    const CMat b2 = hermitian_inverse(hermitian_part(B + v * v.adjoint()));
    return std::abs((A * b1).trace() - (A * b2).trace()) / n;
}

} // namespace cfhb
