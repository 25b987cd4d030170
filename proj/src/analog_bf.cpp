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

#include "cfhb/analog_bf.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <random>

#include "cfhb/errors.hpp"

namespace cfhb {

std::vector<int> RfAllocation::chains_per_user(int num_users) const
{
    std::vector<int> count(static_cast<std::size_t>(num_users), 0);
    for (int k : owner)
        ++count.at(static_cast<std::size_t>(k));
    return count;
}

EnergyTable energy_table(const SpatialCorrelationSet& correlations)
{
    EnergyTable t;
    t.num_aps = correlations.num_aps;
    t.num_users = correlations.num_users;
    t.antennas = correlations.antennas;
    t.values.reserve(correlations.R.size());
    for (const CMat& R : correlations.R)
        t.values.push_back(eig_descending(R).values);
    return t;
}

CVec phase_only_beam(const CVec& u)
{
    const Eigen::Index n = u.size();
    if (n == 0)
        return CVec(0);
    const double peak = u.cwiseAbs().maxCoeff();
    const double negligible = 1e-12 * peak;
    cplx rotation = 1.0;
    if (peak > 0.0) {
        Eigen::Index ref = 0;
        while (std::abs(u[ref]) < peak * (1.0 - 1e-12))
            ++ref;
        rotation = std::conj(u[ref]) / std::abs(u[ref]);
    }
    CVec w(n);
    const double scale = 1.0 / static_cast<double>(n);
    for (Eigen::Index a = 0; a < n; ++a) {
        const cplx x = u[a] * rotation;
        w[a] = std::abs(x) <= negligible ? cplx(scale, 0.0) : std::polar(scale, std::arg(x));
    }
    return w;
}

CVec eigen_beamformer(const CMat& R, int rank)
{
    if (rank < 0 || rank >= R.rows())
        throw DimensionError("eigen_beamformer: rank out of range");
    return phase_only_beam(eig_descending(R).vectors.col(rank));
}

namespace {

// Chain counts c(m, k) with user energies sum_m sum_{r < c(m, k)} lambda_r(m, k).
class CountState {
public:
    CountState(const EnergyTable& energies, std::vector<int> counts)
        : e_(&energies), K_(energies.num_users), c_(std::move(counts)), acc_(static_cast<std::size_t>(K_), 0.0),
          total_(static_cast<std::size_t>(K_), 0)
    {
        for (int m = 0; m < e_->num_aps; ++m)
            for (int k = 0; k < K_; ++k)
                for (int r = 0; r < count(m, k); ++r) {
                    acc_[static_cast<std::size_t>(k)] += slot(m, k, r);
                    ++total_[static_cast<std::size_t>(k)];
                }
    }

    int count(int m, int k) const { return c_[static_cast<std::size_t>(m * K_ + k)]; }
    double energy(int k) const { return acc_[static_cast<std::size_t>(k)]; }
    int chains(int k) const { return total_[static_cast<std::size_t>(k)]; }
    const std::vector<int>& counts() const noexcept { return c_; }
    const std::vector<double>& energies() const noexcept { return acc_; }

    // Energy change of user k when its count at AP m changes by d.
    double delta(int m, int k, int d) const
    {
        double s = 0.0;
        const int c = count(m, k);
        if (d > 0)
            for (int r = c; r < c + d; ++r)
                s += slot(m, k, r);
        else
            for (int r = c + d; r < c; ++r)
                s -= slot(m, k, r);
        return s;
    }
    bool can_move(int m, int j, int k, int a) const
    {
        return a > 0 && count(m, j) >= a && count(m, k) + a <= e_->antennas;
    }
    void move(int m, int j, int k, int a)
    {
        acc_[static_cast<std::size_t>(j)] += delta(m, j, -a);
        acc_[static_cast<std::size_t>(k)] += delta(m, k, a);
        c_[static_cast<std::size_t>(m * K_ + j)] -= a;
        c_[static_cast<std::size_t>(m * K_ + k)] += a;
        total_[static_cast<std::size_t>(j)] -= a;
        total_[static_cast<std::size_t>(k)] += a;
    }

private:
    double slot(int m, int k, int r) const { return std::max(0.0, e_->at(m, k)[r]); }

    const EnergyTable* e_;
    int K_;
    std::vector<int> c_;
    std::vector<double> acc_;
    std::vector<int> total_;
};

bool clearly_less(double a, double b) { return a < b - 1e-12 * std::max(std::abs(a), std::abs(b)); }

// Sorted energies of two users before (o) and after (n) a move; the others
// are unchanged, so the lexicographic order of the sorted energy vectors is
// decided by these two pairs.
bool pair_improves(double o1, double o2, double n1, double n2)
{
    if (o1 > o2)
        std::swap(o1, o2);
    if (n1 > n2)
        std::swap(n1, n2);
    if (clearly_less(o1, n1))
        return true;
    if (clearly_less(n1, o1))
        return false;
    return clearly_less(o2, n2);
}

bool lex_better(std::vector<double> a, std::vector<double> b)
{
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (clearly_less(b[i], a[i]))
            return true;
        if (clearly_less(a[i], b[i]))
            return false;
    }
    return false;
}

// First-improvement descent over transfers (a chains at one AP from j to k)
// and swaps (a chains at m from j to k, b chains at m2 from k to j). Every
// user keeps at least one chain.
void descend(CountState& s, int rf_chains, int num_aps, int num_users)
{
    const int cap = 64 * num_aps * rf_chains * num_users;
    for (int step = 0; step < cap; ++step) {
        bool moved = false;
        for (int m = 0; m < num_aps && !moved; ++m)
            for (int j = 0; j < num_users && !moved; ++j)
                for (int k = 0; k < num_users && !moved; ++k) {
                    if (j == k)
                        continue;
                    for (int a = 1; a <= rf_chains && !moved; ++a) {
                        if (!s.can_move(m, j, k, a))
                            break;
                        const double nj = s.energy(j) + s.delta(m, j, -a);
                        const double nk = s.energy(k) + s.delta(m, k, a);
                        if (s.chains(j) > a && pair_improves(s.energy(j), s.energy(k), nj, nk)) {
                            s.move(m, j, k, a);
                            moved = true;
                            break;
                        }
                        for (int m2 = 0; m2 < num_aps && !moved; ++m2) {
                            if (m2 == m)
                                continue;
                            for (int b = 1; b <= rf_chains; ++b) {
                                if (!s.can_move(m2, k, j, b))
                                    break;
                                if (s.chains(j) - a + b < 1 || s.chains(k) + a - b < 1)
                                    continue;
                                if (pair_improves(s.energy(j), s.energy(k), nj + s.delta(m2, j, b),
                                                  nk + s.delta(m2, k, -b))) {
                                    s.move(m, j, k, a);
                                    s.move(m2, k, j, b);
                                    moved = true;
                                    break;
                                }
                            }
                        }
                    }
                }
        if (!moved)
            return;
    }
}

// Descent, then perturbed restarts from the best state found: a few random
// single-chain transfers followed by descent. The generator has a fixed seed,
// so the result depends only on the energy table.
void improve_allocation(const EnergyTable& energies, int rf_chains, std::vector<int>& counts)
{
    const int M = energies.num_aps;
    const int K = energies.num_users;
    CountState best(energies, counts);
    descend(best, rf_chains, M, K);
    if (K > 1) {
        std::mt19937_64 gen(0x5eed);
        for (int round = 0; round < 96; ++round) {
            CountState s = best;
            const int kicks = 2 + round % 4;
            for (int t = 0, tries = 0; t < kicks && tries < 64; ++tries) {
                const int m = static_cast<int>(gen() % static_cast<std::uint64_t>(M));
                const int j = static_cast<int>(gen() % static_cast<std::uint64_t>(K));
                const int k = static_cast<int>(gen() % static_cast<std::uint64_t>(K));
                if (j == k || !s.can_move(m, j, k, 1) || s.chains(j) < 2)
                    continue;
                s.move(m, j, k, 1);
                ++t;
            }
            descend(s, rf_chains, M, K);
            if (lex_better(s.energies(), best.energies()))
                best = s;
        }
    }
    counts = best.counts();
}

// Phase 1 and 2 of the greedy allocation as chain counts (index m * K + k).
// `first` optionally fixes the AP of every user's first chain.
std::vector<int> greedy_counts(const EnergyTable& energies, int rf_chains, const std::vector<int>* first)
{
    const int M = energies.num_aps;
    const int K = energies.num_users;
    std::vector<int> used(static_cast<std::size_t>(M * K), 0);
    std::vector<int> taken(static_cast<std::size_t>(M), 0);
    std::vector<double> acc(static_cast<std::size_t>(K), 0.0);

    auto has_slot = [&](int m, int k) {
        return taken[static_cast<std::size_t>(m)] < rf_chains && used[static_cast<std::size_t>(m * K + k)] < energies.antennas;
    };
    auto best_slot = [&](int k) -> int {
        int best = -1;
        double best_e = 0.0;
        for (int m = 0; m < M; ++m) {
            if (!has_slot(m, k))
                continue;
            const double e = energies.at(m, k)[used[static_cast<std::size_t>(m * K + k)]];
            if (best < 0 || e > best_e) {
                best = m;
                best_e = e;
            }
        }
        return best;
    };
    auto assign = [&](int m, int k) {
        ++taken[static_cast<std::size_t>(m)];
        int& r = used[static_cast<std::size_t>(m * K + k)];
        acc[static_cast<std::size_t>(k)] += std::max(0.0, energies.at(m, k)[r]);
        ++r;
    };

    // Phase 1: one chain per user, weakest user first.
    if (first) {
        for (int k = 0; k < K; ++k)
            assign((*first)[static_cast<std::size_t>(k)], k);
    } else {
        std::vector<double> best_gain(static_cast<std::size_t>(K), 0.0);
        for (int k = 0; k < K; ++k)
            for (int m = 0; m < M; ++m)
                best_gain[static_cast<std::size_t>(k)] = std::max(best_gain[static_cast<std::size_t>(k)], energies.at(m, k)[0]);
        std::vector<int> users(static_cast<std::size_t>(K));
        std::iota(users.begin(), users.end(), 0);
        std::stable_sort(users.begin(), users.end(), [&](int a, int b) {
            return best_gain[static_cast<std::size_t>(a)] < best_gain[static_cast<std::size_t>(b)];
        });
        for (int k : users) {
            const int m = best_slot(k);
            if (m < 0)
                throw ConfigError("allocate_rf_chains: no free RF chain left for a user");
            assign(m, k);
        }
    }

    // Phase 2: remaining chains to the currently poorest user.
    for (int free_chains = M * rf_chains - K; free_chains > 0; --free_chains) {
        std::vector<int> by_energy(static_cast<std::size_t>(K));
        std::iota(by_energy.begin(), by_energy.end(), 0);
        std::stable_sort(by_energy.begin(), by_energy.end(), [&](int a, int b) {
            return acc[static_cast<std::size_t>(a)] < acc[static_cast<std::size_t>(b)];
        });
        bool placed = false;
        for (int k : by_energy) {
            const int m = best_slot(k);
            if (m >= 0) {
                assign(m, k);
                placed = true;
                break;
            }
        }
        if (!placed)
            break;
    }
    return used;
}

// First-chain APs maximizing the weakest user's dominant eigenvalue, with at
// most rf_chains users per AP: bisection over the candidate thresholds, each
// checked by augmenting-path matching.
std::vector<int> bottleneck_first_chains(const EnergyTable& energies, int rf_chains)
{
    const int M = energies.num_aps;
    const int K = energies.num_users;
    std::vector<double> levels;
    for (int m = 0; m < M; ++m)
        for (int k = 0; k < K; ++k)
            levels.push_back(energies.at(m, k)[0]);
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

    auto match = [&](double t, std::vector<int>& ap_of) {
        ap_of.assign(static_cast<std::size_t>(K), -1);
        std::vector<std::vector<int>> holders(static_cast<std::size_t>(M));
        std::vector<char> seen;
        std::function<bool(int)> augment = [&](int k) {
            for (int m = 0; m < M; ++m) {
                if (energies.at(m, k)[0] < t || seen[static_cast<std::size_t>(m)])
                    continue;
                seen[static_cast<std::size_t>(m)] = 1;
                auto& h = holders[static_cast<std::size_t>(m)];
                if (static_cast<int>(h.size()) < rf_chains) {
                    h.push_back(k);
                    ap_of[static_cast<std::size_t>(k)] = m;
                    return true;
                }
                for (int& other : h) {
                    if (augment(other)) {
                        other = k;
                        ap_of[static_cast<std::size_t>(k)] = m;
                        return true;
                    }
                }
            }
            return false;
        };
        for (int k = 0; k < K; ++k) {
            seen.assign(static_cast<std::size_t>(M), 0);
            if (!augment(k))
                return false;
        }
        return true;
    };

    std::vector<int> best, trial;
    std::size_t lo = 0, hi = levels.size();
    while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (match(levels[mid], trial)) {
            best = trial;
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    if (best.empty())
        match(-std::numeric_limits<double>::infinity(), best);
    return best;
}

} // namespace

RfAllocation allocate_rf_chains(const EnergyTable& energies, int rf_chains)
{
    const int M = energies.num_aps;
    const int K = energies.num_users;
    if (rf_chains <= 0 || K <= 0 || M <= 0)
        throw ConfigError("allocate_rf_chains: empty network");
    if (K > M * rf_chains)
        throw ConfigError("allocate_rf_chains: more users than RF chains (K > M * N_RF)");
    if (rf_chains > energies.antennas)
        throw ConfigError("allocate_rf_chains: N_RF exceeds the antenna count");

    // Two greedy starts, both refined by local search; the second one takes
    // its first chains from a bottleneck matching.
    std::vector<int> used = greedy_counts(energies, rf_chains, nullptr);
    improve_allocation(energies, rf_chains, used);
    const std::vector<int> first = bottleneck_first_chains(energies, rf_chains);
    std::vector<int> alt = greedy_counts(energies, rf_chains, &first);
    improve_allocation(energies, rf_chains, alt);
    if (lex_better(CountState(energies, alt).energies(), CountState(energies, used).energies()))
        used = std::move(alt);

    RfAllocation alloc;
    alloc.num_aps = M;
    alloc.rf_chains = rf_chains;
    alloc.owner.assign(static_cast<std::size_t>(M * rf_chains), -1);
    alloc.order.assign(alloc.owner.size(), -1);
    for (int m = 0; m < M; ++m) {
        int i = 0;
        for (int k = 0; k < K; ++k)
            for (int r = 0; r < used[static_cast<std::size_t>(m * K + k)]; ++r, ++i) {
                alloc.owner[static_cast<std::size_t>(m * rf_chains + i)] = k;
                alloc.order[static_cast<std::size_t>(m * rf_chains + i)] = r;
            }
    }
    return alloc;
}

RfAllocation allocate_rf_chains(const SpatialCorrelationSet& correlations, const ScenarioConfig& config)
{
    if (config.num_users > config.num_aps * config.rf_chains)
        throw ConfigError("allocate_rf_chains: more users than RF chains (K > M * N_RF)");
    return allocate_rf_chains(energy_table(correlations), config.rf_chains);
}

std::vector<double> allocation_energy(const EnergyTable& energies, const RfAllocation& allocation)
{
    std::vector<double> e(static_cast<std::size_t>(energies.num_users), 0.0);
    for (int m = 0; m < allocation.num_aps; ++m)
        for (int i = 0; i < allocation.rf_chains; ++i) {
            const int k = allocation.owner_at(m, i);
            if (k >= 0)
                e[static_cast<std::size_t>(k)] += energies.at(m, k)[allocation.order_at(m, i)];
        }
    return e;
}

AnalogPrecoder build_precoder(const SpatialCorrelationSet& correlations, const RfAllocation& allocation)
{
    const int N = correlations.antennas;
    AnalogPrecoder pre;
    pre.allocation = allocation;
    pre.W.reserve(static_cast<std::size_t>(allocation.num_aps));
    for (int m = 0; m < allocation.num_aps; ++m) {
        CMat W(N, allocation.rf_chains);
        // Eigenvectors are computed once per (AP, owner).
        std::vector<int> owners;
        std::vector<HermitianEig> eigs;
        for (int i = 0; i < allocation.rf_chains; ++i) {
            const int k = allocation.owner_at(m, i);
            const int r = allocation.order_at(m, i);
            if (k < 0 || k >= correlations.num_users || r < 0 || r >= N)
                throw DimensionError("build_precoder: invalid allocation entry");
            auto it = std::find(owners.begin(), owners.end(), k);
            std::size_t slot = static_cast<std::size_t>(it - owners.begin());
            if (it == owners.end()) {
                owners.push_back(k);
                eigs.push_back(eig_descending(correlations.at(m, k)));
            }
            W.col(i) = phase_only_beam(eigs[slot].vectors.col(r));
        }
        pre.W.push_back(std::move(W));
    }
    return pre;
}

CMat effective_correlation(const CMat& R, const CMat& W)
{
    if (R.rows() != W.rows() || R.cols() != W.rows())
        throw DimensionError("effective_correlation: shapes do not conform");
    CMat e = W.adjoint() * R * W;
    return hermitian_part(e);
}

std::string allocation_csv(const RfAllocation& allocation, const EnergyTable& energies)
{
    std::string out = "m,i,owner,order,eigenvalue\n";
    char buf[160];
    for (int m = 0; m < allocation.num_aps; ++m)
        for (int i = 0; i < allocation.rf_chains; ++i) {
            const int k = allocation.owner_at(m, i);
            const int r = allocation.order_at(m, i);
            std::snprintf(buf, sizeof buf, "%d,%d,%d,%d,%.10g\n", m, i, k, r, energies.at(m, k)[r]);
            out += buf;
        }
    return out;
}

} // namespace cfhb
