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

#include "cfhb/errors.hpp"
#include "cfhb/uplink.hpp"
#include "cfhb/validation.hpp"
#include "test_util.hpp"

using namespace cfhb;

namespace {

// Statistics with zero estimation error, so D = Cz for every power vector.
EffectiveChannelStatistics plain_stats(std::vector<BlockDiag> C, const BlockDiag& D)
{
    EffectiveChannelStatistics s;
    s.num_aps = static_cast<int>(D.num_blocks());
    s.num_users = static_cast<int>(C.size());
    s.rf_chains = static_cast<int>(D.block_size());
    s.Re = C;
    for (std::size_t k = 0; k < C.size(); ++k)
        s.E.push_back(0.0 * D);
    s.C = std::move(C);
    s.Cz = D;
    s.D = D;
    s.powers.assign(s.C.size(), 1.0);
    return s;
}

EffectiveChannelEstimate random_estimate(RandomStream& rng, int M, int nrf, int K)
{
    EffectiveChannelEstimate e;
    e.num_aps = M;
    e.rf_chains = nrf;
    for (int k = 0; k < K; ++k)
        e.hhat.push_back(rng.complex_normal_vector(M * nrf));
    return e;
}

} // namespace

TEST_CASE("mmse combiner")
{
    RandomStream rng(3);
    const BlockDiag I = BlockDiag::identity(2, 2);
    EffectiveChannelEstimate one = random_estimate(rng, 2, 2, 1);
    const std::vector<double> p{2.5};
    const CVec v = mmse_combiner(one, I, p)[0];
    const CVec expect = one.hhat[0] / (1.0 + 2.5 * one.hhat[0].squaredNorm());
    CHECK((v - expect).norm() < 1e-12 * expect.norm());

    EffectiveChannelEstimate many = random_estimate(rng, 2, 2, 3);
    const std::vector<double> tiny(3, 1e-12);
    const std::vector<CVec> mrc = mmse_combiner(many, I, tiny);
    for (int k = 0; k < 3; ++k)
        CHECK((mrc[static_cast<std::size_t>(k)] - many.hhat[static_cast<std::size_t>(k)]).norm() <
              1e-9 * many.hhat[static_cast<std::size_t>(k)].norm());
}

TEST_CASE("exact uplink sinr")
{
    RandomStream rng(4);
    const BlockDiag I = BlockDiag::identity(3, 2);
    const EffectiveChannelEstimate one = random_estimate(rng, 3, 2, 1);
    const std::vector<double> p1{4.0};
    CHECK(uplink_sinr_exact(one, I, p1)[0] == doctest::Approx(4.0 * one.hhat[0].squaredNorm()).epsilon(1e-12));

    for (int trial = 0; trial < 20; ++trial) {
        const EffectiveChannelEstimate est = random_estimate(rng, 3, 2, 4);
        const BlockDiag D = testing::random_block_psd(rng, 3, 2, 0.3);
        std::vector<double> p{rng.uniform() * 10, rng.uniform() * 10, 0.0, rng.uniform() * 10};
        const std::vector<double> s = uplink_sinr_exact(est, D, p);
        CHECK(s[2] == 0.0);
        const std::vector<CVec> v = mmse_combiner(est, D, p);
        for (int k = 0; k < 4; ++k) {
            if (k == 2)
                continue;
            const auto uk = static_cast<std::size_t>(k);
            const double at_mmse = combiner_sinr(est, D, p, k, v[uk]);
            CHECK(at_mmse == doctest::Approx(s[uk]).epsilon(1e-8));
            CHECK(combiner_sinr(est, D, p, k, est.hhat[uk]) <= s[uk] * (1.0 + 1e-10));
            CHECK(combiner_sinr(est, D, p, k, rng.complex_normal_vector(6)) <= s[uk] * (1.0 + 1e-10));
            CHECK(s[uk] >= 0.0);
        }
    }
}

TEST_CASE("first approximation")
{
    const BlockDiag one = BlockDiag::identity(1, 1);
    const std::vector<double> p{1.0, 1.0};
    const std::vector<double> s = uplink_sinr_approx1(plain_stats({one, one}, one), p);
    CHECK(s[0] == doctest::Approx(0.5));
    CHECK(s[1] == doctest::Approx(0.5));

    RandomStream rng(5);
    const BlockDiag C = testing::random_block_psd(rng, 2, 3);
    const BlockDiag D = testing::random_block_psd(rng, 2, 3, 0.5);
    const std::vector<double> p1{3.0};
    const double direct = 3.0 * (C.dense() * D.dense().inverse()).trace().real();
    CHECK(uplink_sinr_approx1(plain_stats({C}, D), p1)[0] == doctest::Approx(direct).epsilon(1e-10));

    const std::vector<double> p2{3.0, 3.0};
    CHECK(uplink_sinr_approx1(plain_stats({C, 0.0 * C}, D), p2)[1] == 0.0);
}

TEST_CASE("second approximation")
{
    const BlockDiag I = BlockDiag::identity(2, 1);
    const std::vector<double> p{1.0};
    CHECK(uplink_sinr_approx2(plain_stats({I}, I), p)[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));

    RandomStream rng(6);
    std::vector<BlockDiag> C;
    for (int k = 0; k < 3; ++k)
        C.push_back(testing::random_block_psd(rng, 2, 2));
    const BlockDiag D = testing::random_block_psd(rng, 2, 2, 0.5);
    const EffectiveChannelStatistics st = plain_stats(C, D);
    const std::vector<double> q{2.0, 0.0, 1.0};
    const std::vector<double> s = uplink_sinr_approx2(st, q);
    CHECK(s[1] == 0.0);
    const FixedPointSolution fp = solve_fixed_point(q, C, D, 0.0, 4.0);
    CHECK(s[0] == doctest::Approx(fp.e[0]).epsilon(1e-12));

    // More power for one user never lowers its own SINR.
    const std::vector<double> q2{4.0, 0.0, 1.0};
    CHECK(uplink_sinr_approx2(st, q2)[0] > s[0]);
}

TEST_CASE("max-min power control")
{
    SUBCASE("symmetric users")
    {
        const BlockDiag C = BlockDiag::identity(2, 2);
        const EffectiveChannelStatistics st = plain_stats({C, C, C}, BlockDiag::identity(2, 2));
        const SinrFunction f = [&](std::span<const double> p) { return uplink_sinr_approx2(st, p); };
        const std::vector<double> p0{0.3, 1.0, 0.6};
        const MaxMinResult r = maxmin_power(f, p0, 20.0);
        CHECK(r.converged);
        for (double x : r.p)
            CHECK(x == doctest::Approx(1.0).epsilon(1e-5));
        CHECK(r.spread < 1e-5);
    }
    SUBCASE("single user")
    {
        RandomStream rng(8);
        const EffectiveChannelStatistics st =
            plain_stats({testing::random_block_psd(rng, 2, 2)}, BlockDiag::identity(2, 2));
        const SinrFunction f = [&](std::span<const double> p) { return uplink_sinr_approx2(st, p); };
        const std::vector<double> p0{0.25};
        const MaxMinResult r = maxmin_power(f, p0, 20.0);
        CHECK(r.p[0] == 1.0);
        CHECK(r.powers[0] == 20.0);
    }
    SUBCASE("beats a power grid")
    {
        RandomStream rng(9);
        const BlockDiag strong = 5.0 * testing::random_block_psd(rng, 2, 2);
        const BlockDiag weak = 0.2 * testing::random_block_psd(rng, 2, 2);
        const EffectiveChannelStatistics st = plain_stats({strong, weak}, BlockDiag::identity(2, 2));
        const SinrFunction f = [&](std::span<const double> p) { return uplink_sinr_approx2(st, p); };
        const std::vector<double> p0{1.0, 1.0};
        const MaxMinResult r = maxmin_power(f, p0, 20.0);
        CHECK(r.converged);
        CHECK(r.spread < 1e-4);
        const GridOracleResult grid = power_grid_oracle(f, 2, 100, 20.0);
        CHECK(r.min_sinr >= grid.best_min_sinr * (1.0 - 1e-6));
        CHECK(r.p[0] < 1.0);
        CHECK(r.p[1] == 1.0);
    }
    SUBCASE("zero sinr is an error")
    {
        const SinrFunction f = [](std::span<const double> p) { return std::vector<double>(p.size(), 0.0); };
        const std::vector<double> p0{1.0, 1.0};
        CHECK_THROWS_AS(maxmin_power(f, p0, 20.0), NumericalError);
    }
}

TEST_CASE("uplink rate")
{
    ScenarioConfig c;
    c.coherence_len = 200;
    c.pilot_len = 16;
    const std::vector<double> s{0.0, 1.0, 3.0, -0.5};
    const std::vector<double> r = uplink_rate(s, c);
    CHECK(r[0] == 0.0);
    CHECK(r[1] == doctest::Approx(0.46));
    CHECK(r[2] == doctest::Approx(0.92));
    CHECK(r[3] == 0.0);
}
