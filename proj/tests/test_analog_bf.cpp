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

#include <algorithm>
#include <cmath>

#include "doctest.h"

#include "cfhb/analog_bf.hpp"
#include "cfhb/errors.hpp"
#include "cfhb/validation.hpp"
#include "test_util.hpp"

using namespace cfhb;

namespace {

const cplx J(0.0, 1.0);

EnergyTable table_from(int M, int K, int N, const std::vector<std::vector<double>>& lists)
{
    EnergyTable t;
    t.num_aps = M;
    t.num_users = K;
    t.antennas = N;
    for (const auto& l : lists)
        t.values.push_back(Eigen::Map<const RVec>(l.data(), static_cast<Eigen::Index>(l.size())));
    return t;
}

SpatialCorrelationSet corr_from(int M, int K, std::vector<CMat> R)
{
    SpatialCorrelationSet s;
    s.num_aps = M;
    s.num_users = K;
    s.antennas = static_cast<int>(R.front().rows());
    for (const CMat& r : R)
        s.beta.push_back(r.trace().real() / static_cast<double>(r.rows()));
    s.R = std::move(R);
    return s;
}

} // namespace

TEST_CASE("eigen beamformer examples")
{
    CMat R = CMat::Zero(2, 2);
    R(0, 0) = 4.0;
    R(1, 1) = 1.0;
    CVec w = eigen_beamformer(R, 0);
    CHECK(std::abs(w[0] - 0.5) < 1e-15);
    CHECK(std::abs(w[1] - 0.5) < 1e-15);

    w = eigen_beamformer(CMat::Identity(5, 5), 0);
    for (Eigen::Index a = 0; a < 5; ++a)
        CHECK(std::abs(w[a] - 0.2) < 1e-15);

    R << 2.0, J, -J, 2.0;
    w = eigen_beamformer(R, 0);
    CHECK(std::abs(w[0] - 0.5) < 1e-12);
    CHECK(std::abs(w[1] + 0.5 * J) < 1e-12);

    CHECK_THROWS_AS(eigen_beamformer(R, 2), DimensionError);
}

TEST_CASE("phase convention removes the eigenvector's arbitrary phase")
{
    RandomStream rng(4);
    for (int t = 0; t < 10; ++t) {
        const CVec u = rng.complex_normal_vector(6);
        const CVec ref = phase_only_beam(u);
        for (double theta : {0.3, 1.7, -2.9}) {
            const CVec rotated = phase_only_beam(std::polar(1.0, theta) * u);
            CHECK((rotated - ref).cwiseAbs().maxCoeff() < 1e-12);
        }
        for (Eigen::Index a = 0; a < ref.size(); ++a)
            CHECK(std::abs(std::abs(ref[a]) - 1.0 / 6.0) < 1e-12);
    }
}

TEST_CASE("allocation examples")
{
    SUBCASE("one AP, one chain per user")
    {
        const EnergyTable t = table_from(1, 3, 3, {{5, 1, 0}, {3, 2, 0}, {9, 0.5, 0}});
        const RfAllocation a = allocate_rf_chains(t, 3);
        CHECK(a.chains_per_user(3) == std::vector<int>{1, 1, 1});
        for (int i = 0; i < 3; ++i)
            CHECK(a.order_at(0, i) == 0);
    }
    SUBCASE("single user takes every chain")
    {
        const EnergyTable t = table_from(2, 1, 4, {{4, 3, 2, 1}, {8, 1, 1, 1}});
        const RfAllocation a = allocate_rf_chains(t, 3);
        CHECK(a.chains_per_user(1) == std::vector<int>{6});
        for (int m = 0; m < 2; ++m) {
            std::vector<int> orders;
            for (int i = 0; i < 3; ++i)
                orders.push_back(a.order_at(m, i));
            std::sort(orders.begin(), orders.end());
            CHECK(orders == std::vector<int>{0, 1, 2});
        }
    }
    SUBCASE("each user gets its strong AP")
    {
        // g[AP0][user0] >> g[AP0][user1], g[AP1][user1] >> g[AP1][user0]
        const EnergyTable t = table_from(2, 2, 2, {{100, 1}, {1, 0.1}, {1, 0.1}, {100, 1}});
        const RfAllocation a = allocate_rf_chains(t, 1);
        CHECK(a.owner_at(0, 0) == 0);
        CHECK(a.owner_at(1, 0) == 1);
    }
    SUBCASE("too many users")
    {
        const EnergyTable t = table_from(1, 3, 2, {{1, 0}, {1, 0}, {1, 0}});
        CHECK_THROWS_AS(allocate_rf_chains(t, 2), ConfigError);
    }
}

TEST_CASE("allocation invariants and the exhaustive oracle")
{
    RandomStream rng(21);
    int instances = 0;
    for (int M : {1, 2, 4}) {
        for (int nrf : {1, 2}) {
            for (int K = 1; K <= std::min(4, M * nrf); ++K) {
                if (M * nrf > 8)
                    continue;
                for (int rep = 0; rep < 20; ++rep) {
                    const int N = 4;
                    std::vector<std::vector<double>> lists;
                    for (int i = 0; i < M * K; ++i) {
                        const double scale = std::exp(3.0 * rng.normal());
                        std::vector<double> ev;
                        for (int r = 0; r < N; ++r)
                            ev.push_back(scale * rng.uniform());
                        std::sort(ev.rbegin(), ev.rend());
                        lists.push_back(ev);
                    }
                    const EnergyTable t = table_from(M, K, N, lists);
                    const RfAllocation a = allocate_rf_chains(t, nrf);
                    const std::vector<int> counts = a.chains_per_user(K);
                    CHECK(*std::min_element(counts.begin(), counts.end()) >= 1);
                    for (int m = 0; m < M; ++m)
                        for (int i = 0; i < nrf; ++i)
                            for (int j = i + 1; j < nrf; ++j)
                                CHECK_FALSE((a.owner_at(m, i) == a.owner_at(m, j) && a.order_at(m, i) == a.order_at(m, j)));
                    const std::vector<double> e = allocation_energy(t, a);
                    const double greedy = *std::min_element(e.begin(), e.end());
                    const AllocationOracleResult best = exhaustive_allocation_oracle(lists, M, nrf, K);
                    CHECK(greedy >= 0.9 * best.best_min_energy);
                    CHECK(greedy <= best.best_min_energy * (1.0 + 1e-12));
                    ++instances;
                }
            }
        }
    }
    CHECK(instances > 50);
}

TEST_CASE("precoder from an allocation")
{
    SUBCASE("N_RF = N with R = I gives the all-ones beam")
    {
        const SpatialCorrelationSet s = corr_from(1, 1, {CMat::Identity(3, 3)});
        const RfAllocation a = allocate_rf_chains(energy_table(s), 3);
        const AnalogPrecoder p = build_precoder(s, a);
        CHECK(testing::max_abs(p.W[0] - CMat::Constant(3, 3, 1.0 / 3.0)) < 1e-15);
    }
    SUBCASE("two diagonal owners share the same beam")
    {
        CMat r1 = CMat::Zero(2, 2), r2 = CMat::Zero(2, 2);
        r1(0, 0) = 4.0;
        r1(1, 1) = 1.0;
        r2(0, 0) = 1.0;
        r2(1, 1) = 4.0;
        const SpatialCorrelationSet s = corr_from(1, 2, {r1, r2});
        const AnalogPrecoder p = build_precoder(s, allocate_rf_chains(energy_table(s), 2));
        CHECK(testing::max_abs(p.W[0].col(0) - p.W[0].col(1)) < 1e-15);
        CHECK(testing::max_abs(p.W[0] - CMat::Constant(2, 2, 0.5)) < 1e-15);
    }
    SUBCASE("unit modulus on a random deployment")
    {
        const ScenarioConfig c = testing::small_config(5, 8, 2, 6);
        const SpatialCorrelationSet s = build_correlation(c, generate_geometry(c, 3));
        const AnalogPrecoder p = build_precoder(s, allocate_rf_chains(s, c));
        for (const CMat& W : p.W) {
            CHECK(W.rows() == 8);
            CHECK(W.cols() == 2);
            CHECK((W.cwiseAbs().array() - 1.0 / 8.0).abs().maxCoeff() < 1e-12);
        }
        const std::string csv = allocation_csv(p.allocation, energy_table(s));
        CHECK(csv.rfind("m,i,owner,order,eigenvalue\n", 0) == 0);
        CHECK(std::count(csv.begin(), csv.end(), '\n') == 11);
    }
}

TEST_CASE("effective correlation")
{
    CMat R = CMat::Zero(2, 2);
    R(0, 0) = 4.0;
    R(1, 1) = 1.0;
    CMat W(2, 2);
    W << 0.5, 0.5, 0.5, -0.5;
    CMat expect(2, 2);
    expect << 5.0, 3.0, 3.0, 5.0;
    CHECK(testing::max_abs(effective_correlation(R, W) - expect / 4.0) < 1e-15);

    const CMat Q = Eigen::HouseholderQR<CMat>(RandomStream(3).complex_normal_matrix(4, 4)).householderQ();
    const CMat W2 = Q.leftCols(2);
    CHECK(testing::max_abs(effective_correlation(CMat::Identity(4, 4), W2) - CMat::Identity(2, 2)) < 1e-12);
    CHECK(testing::max_abs(effective_correlation(CMat::Zero(4, 4), W2)) == 0.0);

    RandomStream rng(8);
    for (int t = 0; t < 20; ++t) {
        const CMat Rr = testing::random_psd(rng, 6, 2);
        CMat Wr(6, 3);
        for (Eigen::Index a = 0; a < Wr.size(); ++a)
            Wr(a) = rng.unit_phase() / 6.0;
        CHECK(testing::min_eig_ratio(effective_correlation(Rr, Wr)) >= -1e-10);
    }
    CHECK_THROWS_AS(effective_correlation(CMat::Identity(3, 3), W), DimensionError);
}
