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

#include "cfhb/validation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <string>

#include "cfhb/deployment.hpp"
#include "cfhb/errors.hpp"
#include "cfhb/parallel.hpp"
#include "cfhb/rmt.hpp"
#include "cfhb/rng.hpp"

namespace cfhb {

namespace {

std::string num(double v)
{
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"')
            out += '"';
        out += ch;
    }
    return out + '"';
}

double relative_gap(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

ScenarioConfig desk_config(int M, int N, int nrf, int K, std::uint64_t seed)
{
    ScenarioConfig c;
    c.num_aps = M;
    c.antennas_per_ap = N;
    c.rf_chains = nrf;
    c.num_users = K;
    c.master_seed = seed;
    return c;
}

std::string describe(const ScenarioConfig& c)
{
    return "M=" + std::to_string(c.num_aps) + " N=" + std::to_string(c.antennas_per_ap) +
           " N_RF=" + std::to_string(c.rf_chains) + " K=" + std::to_string(c.num_users) +
           " seed=" + std::to_string(c.master_seed) + " fp=" + config_fingerprint(c);
}

} // namespace

std::string oracle_report_csv(const std::vector<OracleReport>& reports)
{
    std::string out = "check,instance,oracle,artifact,tolerance,pass\n";
    for (const OracleReport& r : reports)
        out += csv_field(r.check) + ',' + csv_field(r.instance) + ',' + num(r.oracle) + ',' + num(r.artifact) + ',' +
               num(r.tolerance) + ',' + (r.pass ? "1" : "0") + '\n';
    return out;
}

double scalar_fixed_point_oracle(double P, double c, double d, double n)
{
    if (!(d > 0.0) || !(n > 0.0) || P < 0.0 || c < 0.0)
        throw ConfigError("scalar_fixed_point_oracle: need d, n > 0 and P, c >= 0");
    const double pc = P * c;
    if (pc == 0.0)
        return 0.0;
    // d e^2 + (d + Pc - Pcn) e - Pcn = 0
    const double b = d + pc - pc * n;
    const double disc = b * b + 4.0 * d * pc * n;
    const double root = std::sqrt(disc);
    // Cancellation-free form of (-b + root) / (2d).
    return b > 0.0 ? 2.0 * pc * n / (b + root) : (-b + root) / (2.0 * d);
}

GridOracleResult power_grid_oracle(const SinrFunction& sinr, int num_users, int resolution, double p_max)
{
    if (num_users < 1 || num_users > 3)
        throw ConfigError("power_grid_oracle: K must be between 1 and 3");
    if (resolution < 1)
        throw ConfigError("power_grid_oracle: resolution must be positive");
    std::size_t total = 1;
    for (int k = 0; k < num_users; ++k)
        total *= static_cast<std::size_t>(resolution);

    std::vector<double> values(total);
    parallel_for(total, [&](std::size_t idx) {
        std::vector<double> v(static_cast<std::size_t>(num_users));
        std::size_t rest = idx;
        for (int k = 0; k < num_users; ++k) {
            v[static_cast<std::size_t>(k)] = static_cast<double>(rest % static_cast<std::size_t>(resolution) + 1);
            rest /= static_cast<std::size_t>(resolution);
        }
        const double top = *std::max_element(v.begin(), v.end());
        for (double& x : v)
            x = x / top * p_max;
        const std::vector<double> s = sinr(v);
        values[idx] = *std::min_element(s.begin(), s.end());
    });

    GridOracleResult out;
    out.evaluated = total;
    std::size_t best = 0;
    for (std::size_t i = 1; i < total; ++i)
        if (values[i] > values[best])
            best = i;
    out.best_min_sinr = values[best];
    out.argmax.resize(static_cast<std::size_t>(num_users));
    std::size_t rest = best;
    for (int k = 0; k < num_users; ++k) {
        out.argmax[static_cast<std::size_t>(k)] =
            static_cast<double>(rest % static_cast<std::size_t>(resolution) + 1);
        rest /= static_cast<std::size_t>(resolution);
    }
    const double top = *std::max_element(out.argmax.begin(), out.argmax.end());
    for (double& x : out.argmax)
        x /= top;
    return out;
}

AllocationOracleResult exhaustive_allocation_oracle(const std::vector<std::vector<double>>& eigenvalues, int num_aps,
                                                    int rf_chains, int num_users)
{
    if (num_aps < 1 || rf_chains < 1 || num_users < 1)
        throw ConfigError("exhaustive_allocation_oracle: empty instance");
    if (num_aps * rf_chains > 8)
        throw ConfigError("exhaustive_allocation_oracle: M * N_RF must be at most 8");
    if (num_users > num_aps * rf_chains)
        throw ConfigError("exhaustive_allocation_oracle: more users than chains");
    if (eigenvalues.size() != static_cast<std::size_t>(num_aps * num_users))
        throw DimensionError("exhaustive_allocation_oracle: need M * K eigenvalue lists");

    // All ways of splitting rf_chains among the users at one AP.
    std::vector<std::vector<int>> splits;
    std::vector<int> cur(static_cast<std::size_t>(num_users), 0);
    auto gen = [&](auto&& self, int user, int left) -> void {
        if (user == num_users - 1) {
            cur[static_cast<std::size_t>(user)] = left;
            splits.push_back(cur);
            return;
        }
        for (int c = left; c >= 0; --c) {
            cur[static_cast<std::size_t>(user)] = c;
            self(self, user + 1, left - c);
        }
    };
    gen(gen, 0, rf_chains);

    AllocationOracleResult out;
    out.best_min_energy = -std::numeric_limits<double>::infinity();
    std::vector<int> choice(static_cast<std::size_t>(num_aps), 0);
    std::vector<int> counts(static_cast<std::size_t>(num_aps * num_users));
    auto energy_of = [&](int m, int k, int c) {
        const std::vector<double>& ev = eigenvalues[static_cast<std::size_t>(m * num_users + k)];
        if (c > static_cast<int>(ev.size()))
            return -1.0; // more chains than eigenvectors: invalid
        double s = 0.0;
        for (int r = 0; r < c; ++r)
            s += ev[static_cast<std::size_t>(r)];
        return s;
    };
    for (;;) {
        std::vector<double> total(static_cast<std::size_t>(num_users), 0.0);
        std::vector<int> owned(static_cast<std::size_t>(num_users), 0);
        bool valid = true;
        for (int m = 0; m < num_aps && valid; ++m) {
            const std::vector<int>& split = splits[static_cast<std::size_t>(choice[static_cast<std::size_t>(m)])];
            for (int k = 0; k < num_users; ++k) {
                const int c = split[static_cast<std::size_t>(k)];
                const double e = energy_of(m, k, c);
                if (e < 0.0) {
                    valid = false;
                    break;
                }
                total[static_cast<std::size_t>(k)] += e;
                owned[static_cast<std::size_t>(k)] += c;
            }
        }
        if (valid && *std::min_element(owned.begin(), owned.end()) >= 1) {
            ++out.evaluated;
            const double v = *std::min_element(total.begin(), total.end());
            if (v > out.best_min_energy) {
                out.best_min_energy = v;
                for (int m = 0; m < num_aps; ++m)
                    for (int k = 0; k < num_users; ++k)
                        counts[static_cast<std::size_t>(m * num_users + k)] =
                            splits[static_cast<std::size_t>(choice[static_cast<std::size_t>(m)])]
                                  [static_cast<std::size_t>(k)];
            }
        }
        int m = 0;
        while (m < num_aps && ++choice[static_cast<std::size_t>(m)] == static_cast<int>(splits.size()))
            choice[static_cast<std::size_t>(m++)] = 0;
        if (m == num_aps)
            break;
    }
    if (out.evaluated == 0)
        throw NumericalError("exhaustive_allocation_oracle: no valid allocation");
    out.counts = std::move(counts);
    return out;
}

// ---------------------------------------------------------------------------

std::vector<OracleReport> run_validation(const ValidationOptions& options)
{
    if (options.trials < 1)
        throw ConfigError("run_validation: trials must be positive");
    std::vector<OracleReport> reports;

    // Scalar fixed points against the closed form.
    struct Scalar {
        double P, c, d;
        int n;
    };
    for (const Scalar& s : {Scalar{1.0, 1.0, 1.0, 2}, Scalar{2.0, 0.5, 3.0, 4}, Scalar{10.0, 0.1, 0.2, 8}}) {
        const BlockDiag C = s.c * BlockDiag::identity(static_cast<std::size_t>(s.n), 1);
        const BlockDiag S0 = s.d * BlockDiag::identity(static_cast<std::size_t>(s.n), 1);
        const std::vector<double> w{s.P};
        const FixedPointSolution sol = solve_fixed_point(w, {C}, S0, 0.0, s.n);
        const double oracle = scalar_fixed_point_oracle(s.P, s.c, s.d, s.n);
        reports.push_back({"fixed_point_scalar",
                           "P=" + num(s.P) + " c=" + num(s.c) + " d=" + num(s.d) + " n=" + std::to_string(s.n), oracle,
                           sol.e[0], 1e-9, relative_gap(sol.e[0], oracle) <= 1e-9});
    }

    // Rank-one inversion identity on random PD matrices.
    {
        RandomStream rng(derive_seed(options.seed, {tag(StreamTag::Oracle), 1}));
        double worst = 0.0;
        for (int t = 0; t < 100; ++t) {
            const CMat A = rng.complex_normal_matrix(4, 4);
            const CMat U = A * A.adjoint() + CMat::Identity(4, 4);
            const CVec x = rng.complex_normal_vector(4);
            const RankOneSides sides = rank_one_update_identity(U, x, 1.0);
            worst = std::max(worst, (sides.lhs - sides.rhs).cwiseAbs().maxCoeff() / sides.rhs.cwiseAbs().maxCoeff());
        }
        reports.push_back({"rank_one_identity", "100 random 4x4 PD", 0.0, worst, 1e-10, worst <= 1e-10});
    }

    // Combiner optimality and the two exact-SINR code paths.
    {
        const ScenarioConfig c = desk_config(4, 4, 2, 4, options.seed);
        const Deployment dep(c, geometry_seed(c.master_seed, 0));
        const std::vector<double> p = dep.full_powers();
        const BlockDiag& D = dep.stats().D;
        double worst_gap = 0.0;
        int violations = 0;
        for (int t = 0; t < options.trials; ++t) {
            const BlockSample s = dep.draw_block(static_cast<std::uint64_t>(t));
            const std::vector<double> exact = uplink_sinr_exact(s.estimate, D, p);
            const std::vector<CVec> v = mmse_combiner(s.estimate, D, p);
            for (int k = 0; k < c.num_users; ++k) {
                const auto ku = static_cast<std::size_t>(k);
                const double rq = combiner_sinr(s.estimate, D, p, k, v[ku]);
                worst_gap = std::max(worst_gap, relative_gap(rq, exact[ku]));
                const double mrc = combiner_sinr(s.estimate, D, p, k, s.estimate.hhat[ku]);
                if (mrc > rq * (1.0 + 1e-12))
                    ++violations;
            }
        }
        reports.push_back({"mmse_equals_closed_form", describe(c), 0.0, worst_gap, 1e-9, worst_gap <= 1e-9});
        reports.push_back({"mmse_dominates_mrc", describe(c), 0.0, static_cast<double>(violations), 0.0,
                           violations == 0});
    }

    // Max-min iteration against the brute-force grid (approx2 utility, K = 2).
    {
        const ScenarioConfig c = desk_config(4, 4, 1, 2, options.seed);
        const Deployment dep(c, geometry_seed(c.master_seed, 0));
        const SinrFunction fn = [&dep](std::span<const double> p) { return uplink_sinr_approx2(dep.stats(), p); };
        const std::vector<double> p0(2, 1.0);
        const MaxMinResult alg = maxmin_power(fn, p0, c.ul_power_mw);
        const GridOracleResult grid = power_grid_oracle(fn, 2, options.grid_resolution, c.ul_power_mw);
        reports.push_back({"maxmin_vs_grid", describe(c), grid.best_min_sinr, alg.min_sinr, 0.01,
                           alg.min_sinr >= grid.best_min_sinr * (1.0 - 0.01)});
        reports.push_back({"maxmin_spread", describe(c), 0.0, alg.spread, 0.01, alg.spread < 0.01});
    }

    // Greedy RF allocation against exhaustive search.
    {
        const ScenarioConfig c = desk_config(4, 4, 2, 4, options.seed);
        const Geometry geo = generate_geometry(c, geometry_seed(c.master_seed, 0));
        const SpatialCorrelationSet corr = build_correlation(c, geo);
        const EnergyTable table = energy_table(corr);
        std::vector<std::vector<double>> ev;
        for (const RVec& v : table.values)
            ev.emplace_back(v.data(), v.data() + v.size());
        const AllocationOracleResult best = exhaustive_allocation_oracle(ev, c.num_aps, c.rf_chains, c.num_users);
        const std::vector<double> got = allocation_energy(table, allocate_rf_chains(table, c.rf_chains));
        const double greedy = *std::min_element(got.begin(), got.end());
        reports.push_back({"allocation_vs_exhaustive", describe(c), best.best_min_energy, greedy, 0.1,
                           greedy >= 0.9 * best.best_min_energy});
    }

    // Second uplink approximation against the Monte Carlo mean.
    {
        const ScenarioConfig c = desk_config(8, 4, 2, 4, options.seed);
        const Deployment dep(c, geometry_seed(c.master_seed, 0));
        const std::vector<double> p = dep.full_powers();
        const std::vector<double> approx = uplink_sinr_approx2(dep.stats(), p);
        std::vector<double> mean(p.size(), 0.0);
        for (int t = 0; t < options.trials; ++t) {
            const std::vector<double> s = uplink_sinr_exact(dep.draw_block(static_cast<std::uint64_t>(t)).estimate,
                                                            dep.stats().D, p);
            for (std::size_t k = 0; k < s.size(); ++k)
                mean[k] += s[k] / options.trials;
        }
        std::vector<double> err;
        for (std::size_t k = 0; k < p.size(); ++k)
            err.push_back(relative_gap(approx[k], mean[k]));
        std::sort(err.begin(), err.end());
        const double med = 0.5 * (err[(err.size() - 1) / 2] + err[err.size() / 2]);
        reports.push_back({"approx2_vs_exact_mc", describe(c), 0.0, med, 0.1, med < 0.1});
    }
    return reports;
}

} // namespace cfhb
