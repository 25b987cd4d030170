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

#include <cmath>

#include "doctest.h"

#include "cfhb/deployment.hpp"
#include "cfhb/errors.hpp"
#include "cfhb/estimation.hpp"
#include "test_util.hpp"

using namespace cfhb;

namespace {

SpatialCorrelationSet corr_set(int M, int K, const std::vector<CMat>& R)
{
    SpatialCorrelationSet s;
    s.num_aps = M;
    s.num_users = K;
    s.antennas = static_cast<int>(R.front().rows());
    s.R = R;
    for (const CMat& r : R)
        s.beta.push_back(r.trace().real() / static_cast<double>(r.rows()));
    return s;
}

AnalogPrecoder plain_precoder(std::vector<CMat> W)
{
    AnalogPrecoder p;
    p.allocation.num_aps = static_cast<int>(W.size());
    p.allocation.rf_chains = static_cast<int>(W.front().cols());
    p.W = std::move(W);
    return p;
}

} // namespace

TEST_CASE("pilot books")
{
    const PilotBook orth = generate_pilots(PilotKind::Orthogonal, 2, 2, 0);
    CHECK(testing::max_abs(orth.psi.adjoint() * orth.psi - 2.0 * CMat::Identity(2, 2)) < 1e-12);
    const PilotBook orth16 = generate_pilots(PilotKind::Orthogonal, 16, 5, 0);
    CHECK(testing::max_abs(orth16.psi.adjoint() * orth16.psi - 16.0 * CMat::Identity(5, 5)) < 1e-9);
    CHECK_THROWS_AS(generate_pilots(PilotKind::Orthogonal, 2, 3, 0), ConfigError);

    const PilotBook rnd = generate_pilots(PilotKind::Random, 16, 4, 9);
    for (int k = 0; k < 4; ++k)
        CHECK(std::abs(rnd.psi.col(k).squaredNorm() - 16.0) < 1e-9);

    // E |psi_1^H psi_2|^2 = tau_p for independent unit-circle entries.
    double acc = 0.0;
    const int draws = 10000;
    for (int s = 0; s < draws; ++s) {
        const PilotBook b = generate_pilots(PilotKind::Random, 16, 2, static_cast<std::uint64_t>(s));
        acc += std::norm(b.psi.col(0).dot(b.psi.col(1)));
    }
    CHECK(acc / draws == doctest::Approx(16.0).epsilon(0.05));
}

TEST_CASE("pilot reception")
{
    RandomStream rng(12);
    const int M = 1, N = 2, nrf = 2, K = 2, tp = 2;
    std::vector<CMat> R{testing::random_pd(rng, N), testing::random_pd(rng, N)};
    const SpatialCorrelationSet corr = corr_set(M, K, R);
    const AnalogPrecoder pre = plain_precoder({rng.complex_normal_matrix(N, nrf)});
    const ChannelRealization h = draw_channels(corr, 5, 0);
    const PilotBook pilots = generate_pilots(PilotKind::Random, tp, K, 3);

    SUBCASE("zero pilot power and no noise")
    {
        const std::vector<CVec> y = receive_pilots(pre, h, pilots, 0.0, {});
        CHECK(y[0].norm() == 0.0);
    }
    SUBCASE("stacked form equals the Kronecker form")
    {
        const std::vector<CMat> z = draw_pilot_noise(M, N, tp, 5, 0);
        const std::vector<CVec> y = receive_pilots(pre, h, pilots, 4.0, z);
        // y_e = sqrt(Pp) (Psi kron I) h_e + vec(W^H Z), with h_e stacking W^H h_k.
        CMat kron = CMat::Zero(tp * nrf, K * nrf);
        for (int i = 0; i < tp; ++i)
            for (int k = 0; k < K; ++k)
                kron.block(i * nrf, k * nrf, nrf, nrf) = pilots.psi(i, k) * CMat::Identity(nrf, nrf);
        CVec he(K * nrf);
        for (int k = 0; k < K; ++k)
            he.segment(k * nrf, nrf) = pre.W[0].adjoint() * h.at(0, k);
        CVec noise(tp * nrf);
        for (int i = 0; i < tp; ++i)
            noise.segment(i * nrf, nrf) = pre.W[0].adjoint() * z[0].col(i);
        const CVec expect = 2.0 * kron * he + noise;
        CHECK((y[0] - expect).cwiseAbs().maxCoeff() < 1e-12 * expect.cwiseAbs().maxCoeff());
    }
    SUBCASE("single symbol, single user")
    {
        const std::vector<CMat> R1{testing::random_pd(rng, N)};
        const SpatialCorrelationSet c1 = corr_set(1, 1, R1);
        const ChannelRealization h1 = draw_channels(c1, 2, 0);
        PilotBook one;
        one.psi = CMat::Ones(1, 1);
        const std::vector<CVec> y = receive_pilots(pre, h1, one, 9.0, {});
        CHECK((y[0] - 3.0 * pre.W[0].adjoint() * h1.at(0, 0)).norm() < 1e-12);
    }
}

TEST_CASE("scalar LMMSE closed form")
{
    const double c = 2.5, Pp = 3.0; // W = [1] so W^H W = 1
    const SpatialCorrelationSet corr = corr_set(1, 1, {CMat::Constant(1, 1, c)});
    const AnalogPrecoder pre = plain_precoder({CMat::Ones(1, 1)});
    const EffectiveInputs in = effective_inputs(corr, pre);
    PilotBook one;
    one.psi = CMat::Ones(1, 1);
    const CVec y = CVec::Constant(1, cplx(0.7, -1.1));
    const EffectiveChannelEstimate est = lmmse_estimate({y}, in, one, Pp);
    const cplx expect = std::sqrt(Pp) * c / (Pp * c + 1.0) * y[0];
    CHECK(std::abs(est.hhat[0][0] - expect) < 1e-14);

    const std::vector<double> p{1.0};
    const EffectiveChannelStatistics st = estimate_covariances(in, one, Pp, p);
    CHECK(st.C[0].block(0)(0, 0).real() == doctest::Approx(Pp * c * c / (Pp * c + 1.0)).epsilon(1e-13));
    CHECK(st.E[0].block(0)(0, 0).real() == doctest::Approx(c - Pp * c * c / (Pp * c + 1.0)).epsilon(1e-13));
    CHECK(st.D.block(0)(0, 0).real() == doctest::Approx(1.0 + c / (Pp * c + 1.0)).epsilon(1e-13));
}

TEST_CASE("LMMSE limits")
{
    RandomStream rng(3);
    const int N = 3, K = 3;
    std::vector<CMat> R;
    for (int k = 0; k < K; ++k)
        R.push_back(testing::random_pd(rng, N));
    const SpatialCorrelationSet corr = corr_set(1, K, R);
    const AnalogPrecoder pre = plain_precoder({rng.complex_normal_matrix(N, N)});
    const EffectiveInputs in = effective_inputs(corr, pre);
    const PilotBook orth = generate_pilots(PilotKind::Orthogonal, K, K, 0);
    const ChannelRealization h = draw_channels(corr, 8, 0);
    const std::vector<CVec> he = effective_channels(pre, h);

    SUBCASE("noise-free, orthogonal pilots, strong pilots recover the channel")
    {
        const double Pp = 1e12;
        const EffectiveChannelEstimate est = lmmse_estimate(receive_pilots(pre, h, orth, Pp, {}), in, orth, Pp);
        for (int k = 0; k < K; ++k)
            CHECK((est.hhat[static_cast<std::size_t>(k)] - he[static_cast<std::size_t>(k)]).norm() <=
                  1e-8 * he[static_cast<std::size_t>(k)].norm());
    }
    SUBCASE("vanishing pilot power returns the prior mean")
    {
        const std::vector<CMat> z = draw_pilot_noise(1, N, K, 8, 0);
        const double Pp = 1e-14;
        const EffectiveChannelEstimate est = lmmse_estimate(receive_pilots(pre, h, orth, Pp, z), in, orth, Pp);
        for (const CVec& v : est.hhat)
            CHECK(v.norm() < 1e-5);
    }
    SUBCASE("wrong received length")
    {
        CHECK_THROWS_AS(lmmse_estimate({CVec::Zero(2)}, in, orth, 1.0), DimensionError);
    }
}

TEST_CASE("estimate covariances")
{
    SUBCASE("orthogonal pilots have vanishing cross terms")
    {
        ScenarioConfig c = testing::small_config(3, 4, 2, 4);
        c.pilot_kind = PilotKind::Orthogonal;
        c.pilot_len = 4;
        const Deployment dep(c, 17);
        const EffectiveChannelStatistics& st = dep.stats();
        for (int k = 0; k < 4; ++k)
            for (int kp = 0; kp < 4; ++kp)
                if (k != kp)
                    for (int m = 0; m < 3; ++m)
                        CHECK(testing::max_abs(st.cross(k, kp).block(static_cast<std::size_t>(m))) < 1e-9);
    }
    SUBCASE("PSD structure, D for arbitrary powers")
    {
        const ScenarioConfig c = testing::small_config(4, 4, 2, 5);
        const Deployment dep(c, 2);
        const EffectiveChannelStatistics& st = dep.stats();
        REQUIRE(st.C.size() == 5);
        for (int k = 0; k < 5; ++k) {
            const auto ku = static_cast<std::size_t>(k);
            for (std::size_t m = 0; m < 4; ++m) {
                CHECK((st.C[ku].block(m).array() == st.cross(k, k).block(m).array()).all());
                CHECK(testing::min_eig_ratio(st.C[ku].block(m)) >= -1e-10);
                CHECK(testing::min_eig_ratio(st.E[ku].block(m)) >= -1e-10);
                CHECK(testing::max_abs(st.E[ku].block(m) - (st.Re[ku].block(m) - st.C[ku].block(m))) <=
                      1e-9 * testing::max_abs(st.Re[ku].block(m)));
                CHECK(st.C[ku].block(m).rows() == 2);
            }
        }
        for (std::size_t m = 0; m < 4; ++m)
            CHECK(testing::min_eig_ratio(st.Cz.block(m)) > 0.0);
        RandomStream rng(6);
        for (int t = 0; t < 20; ++t) {
            std::vector<double> p(5);
            for (double& x : p)
                x = c.ul_power_mw * rng.uniform();
            const BlockDiag D = assemble_d(st, p);
            for (std::size_t m = 0; m < 4; ++m)
                CHECK(testing::min_eig_ratio(D.block(m)) >= -1e-10);
        }
    }
}

TEST_CASE("LMMSE statistics by Monte Carlo")
{
    const ScenarioConfig c = testing::small_config(2, 4, 2, 3);
    const Deployment dep(c, 4);
    const EffectiveChannelStatistics& st = dep.stats();
    const int T = 10000;
    const Eigen::Index n = 4;
    const int K = 3;
    std::vector<CMat> cov(K, CMat::Zero(n, n));
    std::vector<CMat> orth(K, CMat::Zero(n, n));
    std::vector<RMat> orth_sq(K, RMat::Zero(n, n));
    for (int t = 0; t < T; ++t) {
        const BlockSample s = dep.draw_block(static_cast<std::uint64_t>(t));
        for (int k = 0; k < K; ++k) {
            const auto ku = static_cast<std::size_t>(k);
            const CVec& hh = s.estimate.hhat[ku];
            const CMat prod = hh * (s.h[ku] - hh).adjoint();
            cov[ku] += hh * hh.adjoint();
            orth[ku] += prod;
            orth_sq[ku] += prod.cwiseAbs2();
        }
    }
    for (int k = 0; k < K; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        const CMat C = st.C[ku].dense();
        const CMat emp = cov[ku] / T;
        CHECK(testing::max_abs(emp - C) < 0.05 * testing::max_abs(C));
        // Cross-AP blocks vanish.
        CHECK(testing::max_abs(emp.block(0, 2, 2, 2)) < 0.05 * testing::max_abs(C));
        const CMat mean = orth[ku] / T;
        for (Eigen::Index a = 0; a < n; ++a) {
            for (Eigen::Index b = 0; b < n; ++b) {
                const double second = orth_sq[ku](a, b) / T;
                const double se = std::sqrt(std::max(second - std::norm(mean(a, b)), 0.0) / T);
                CHECK(std::abs(mean(a, b)) < 3.0 * se + 1e-300);
            }
        }
    }
}
