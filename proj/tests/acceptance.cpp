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

// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "cfhb/deployment.hpp"
#include "cfhb/downlink.hpp"
#include "cfhb/harness.hpp"
#include "cfhb/parallel.hpp"
#include "cfhb/rmt.hpp"
#include "cfhb/rng.hpp"
#include "cfhb/uplink.hpp"
#include "cfhb/validation.hpp"

using namespace cfhb;

namespace {

int failures = 0;

void report(int id, bool pass, const std::string& what, const std::string& detail)
{
    std::printf("AC%d %s: %s | %s\n", id, pass ? "PASS" : "FAIL", what.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass)
        ++failures;
}

std::string fmt(const char* f, double a)
{
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

double median(std::vector<double> v)
{
    if (v.empty())
        return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

// Two-sample Kolmogorov-Smirnov statistic.
double ks_distance(std::vector<double> a, std::vector<double> b)
{
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x)
            ++i;
        while (j < b.size() && b[j] <= x)
            ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
    }
    return d;
}

double max_abs(const CMat& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

double min_eig_ratio(const CMat& a)
{
    Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (a + a.adjoint()));
    const double top = es.eigenvalues().cwiseAbs().maxCoeff();
    return top == 0.0 ? 0.0 : es.eigenvalues().minCoeff() / top;
}

ScenarioConfig make_config(int M, int N, int nrf, int K)
{
    ScenarioConfig c;
    c.num_aps = M;
    c.antennas_per_ap = N;
    c.rf_chains = nrf;
    c.num_users = K;
    c.master_seed = 1;
    return c;
}

struct UplinkStudy {
    std::vector<std::vector<double>> err2; // [k][g]
    std::vector<std::vector<double>> err1;
    std::vector<double> se_exact;
    std::vector<double> se_approx2;
    int max_iterations = 0;
};

UplinkStudy uplink_study(const ScenarioConfig& c, int geometries, int blocks)
{
    const auto K = static_cast<std::size_t>(c.num_users);
    struct PerGeometry {
        std::vector<double> a1, a2, mean, se_exact;
        int iterations = 0;
    };
    std::vector<PerGeometry> per(static_cast<std::size_t>(geometries));
    parallel_for(per.size(), [&](std::size_t g) {
        const Deployment dep(c, geometry_seed(c.master_seed, g));
        const std::vector<double> p = dep.full_powers();
        PerGeometry& out = per[g];
        out.a1 = uplink_sinr_approx1(dep.stats(), p);
        out.a2 = uplink_sinr_approx2(dep.stats(), p);
        out.iterations =
            solve_fixed_point(p, dep.stats().C, dep.stats().D, 0.0, c.stacked_dim()).iterations;
        out.mean.assign(K, 0.0);
        for (int t = 0; t < blocks; ++t) {
            const std::vector<double> s =
                uplink_sinr_exact(dep.draw_block(static_cast<std::uint64_t>(t)).estimate, dep.stats().D, p);
            for (std::size_t k = 0; k < K; ++k) {
                out.mean[k] += s[k] / blocks;
                out.se_exact.push_back(spectral_efficiency(s[k], c.se_prefactor()));
            }
        }
    });
    UplinkStudy st;
    st.err1.resize(K);
    st.err2.resize(K);
    for (const PerGeometry& g : per) {
        for (std::size_t k = 0; k < K; ++k) {
            st.err1[k].push_back(std::abs(g.a1[k] - g.mean[k]) / g.mean[k]);
            st.err2[k].push_back(std::abs(g.a2[k] - g.mean[k]) / g.mean[k]);
            st.se_approx2.push_back(spectral_efficiency(g.a2[k], c.se_prefactor()));
        }
        st.se_exact.insert(st.se_exact.end(), g.se_exact.begin(), g.se_exact.end());
        st.max_iterations = std::max(st.max_iterations, g.iterations);
    }
    return st;
}

double pooled_median(const std::vector<std::vector<double>>& per_user)
{
    std::vector<double> all;
    for (const auto& v : per_user)
        all.insert(all.end(), v.begin(), v.end());
    return median(all);
}

struct DownlinkStudy {
    double median_dev = 0.0;
    std::vector<double> dev;
    int iterations = 0;
};

DownlinkStudy downlink_study(const ScenarioConfig& c, std::uint64_t geometry, int trials)
{
    const Deployment dep(c, geometry_seed(c.master_seed, geometry));
    const std::vector<double> p(static_cast<std::size_t>(c.num_users), c.dl_power_mw);
    const DlApproximation a = downlink_sinr_approx(dep.stats(), p, c.rho());
    const DlMonteCarlo mc = downlink_sinr_exact_mc(dep, p, trials);
    DownlinkStudy out;
    for (std::size_t k = 0; k < p.size(); ++k)
        out.dev.push_back(std::abs(a.sinr[k] - mc.sinr[k]) / mc.sinr[k]);
    out.median_dev = median(out.dev);
    const std::vector<double> ones(p.size(), 1.0);
    const BlockDiag zero = BlockDiag::zeros(static_cast<std::size_t>(c.num_aps), c.rf_chains);
    out.iterations = solve_fixed_point(ones, dep.stats().C, zero, c.rho(), c.stacked_dim()).iterations;
    return out;
}

std::string read_file(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

int main()
{
    const auto start = std::chrono::steady_clock::now();
    int max_iterations = 0;

    // 1. Uplink approx2 fidelity at desk scale.
    {
        const ScenarioConfig c = make_config(20, 8, 2, 8);
        const UplinkStudy st = uplink_study(c, 20, 500);
        double worst = 0.0;
        for (const auto& e : st.err2)
            worst = std::max(worst, median(e));
        const double ks = ks_distance(st.se_exact, st.se_approx2);
        max_iterations = std::max(max_iterations, st.max_iterations);
        report(1, worst < 0.10 && ks < 0.10, "uplink approx2 vs exact (M=20 N=8 N_RF=2 K=8, 20 geometries x 500 blocks)",
               fmt("worst per-user median rel err %.4f (< 0.10)", worst) + fmt(", KS %.4f (< 0.10)", ks));
    }

    // 2. Approx1 regime: M N_RF = 4K against M N_RF = K (K/2 violates K <= M N_RF).
    {
        const ScenarioConfig large = make_config(16, 8, 2, 8);
        const ScenarioConfig small = make_config(4, 8, 2, 8);
        const UplinkStudy a = uplink_study(large, 10, 200);
        const UplinkStudy b = uplink_study(small, 10, 200);
        max_iterations = std::max({max_iterations, a.max_iterations, b.max_iterations});
        const double e1_large = pooled_median(a.err1), e1_small = pooled_median(b.err1);
        const double e2_large = pooled_median(a.err2), e2_small = pooled_median(b.err2);
        const bool ratio_ok = 2.0 * e1_large <= e1_small;
        report(2, ratio_ok && e2_large < 0.10 && e2_small < 0.10,
               "approx1 regime, M N_RF = 4K (M=16) vs M N_RF = K (M=4), N=8 N_RF=2 K=8",
               fmt("approx1 median err %.4f", e1_large) + fmt(" vs %.4f", e1_small) +
                   fmt(" (ratio %.2f >= 2)", e1_small / e1_large) + fmt(", approx2 median err %.4f", e2_large) +
                   fmt(" and %.4f (< 0.10)", e2_small));
    }

    // 3. Downlink deterministic equivalent against Monte Carlo.
    {
        const ScenarioConfig c = make_config(10, 4, 2, 4);
        const DownlinkStudy canonical = downlink_study(c, 0, 1000);
        max_iterations = std::max(max_iterations, canonical.iterations);
        std::vector<double> spread;
        for (std::uint64_t g = 0; g < 10; ++g) {
            const DownlinkStudy s = g == 0 ? canonical : downlink_study(c, g, 1000);
            max_iterations = std::max(max_iterations, s.iterations);
            spread.push_back(s.median_dev);
        }
        report(3, canonical.median_dev < 0.15, "downlink approx vs MC (M=10 N=4 N_RF=2 K=4, 1000 trials, geometry 0)",
               fmt("median per-user rel dev %.4f (< 0.15)", canonical.median_dev) +
                   fmt("; median over 10 geometries %.4f", median(spread)));
    }

    // 4. Fixed-point exactness.
    {
        const BlockDiag I2 = BlockDiag::identity(2, 1);
        const std::vector<double> w{1.0};
        const FixedPointSolution s = solve_fixed_point(w, {I2}, I2, 0.0, 2.0);
        const double root_err = std::abs(s.e[0] - std::sqrt(2.0));
        max_iterations = std::max(max_iterations, s.iterations);

        RandomStream rng(4);
        double scale_err = 0.0;
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<double> wt;
            std::vector<BlockDiag> C, Cg;
            const double gamma = std::pow(10.0, 4.0 * rng.uniform() - 2.0);
            for (int k = 0; k < 4; ++k) {
                std::vector<CMat> blocks;
                for (int m = 0; m < 3; ++m) {
                    const CMat a = rng.complex_normal_matrix(2, 2);
                    blocks.push_back(a * a.adjoint());
                }
                C.emplace_back(std::move(blocks));
                Cg.push_back(gamma * C.back());
                wt.push_back(10.0 * rng.uniform());
            }
            std::vector<CMat> sb;
            for (int m = 0; m < 3; ++m) {
                const CMat a = rng.complex_normal_matrix(2, 2);
                sb.push_back(a * a.adjoint() + 0.1 * CMat::Identity(2, 2));
            }
            const BlockDiag S0(std::move(sb));
            const FixedPointSolution x = solve_fixed_point(wt, C, S0, 0.0, 6.0);
            const FixedPointSolution y = solve_fixed_point(wt, Cg, gamma * S0, 0.0, 6.0);
            max_iterations = std::max({max_iterations, x.iterations, y.iterations});
            for (std::size_t k = 0; k < wt.size(); ++k)
                scale_err = std::max(scale_err, std::abs(x.e[k] - y.e[k]) / x.e[k]);
        }
        report(4, root_err < 1e-9 && scale_err < 1e-9 && max_iterations < 500, "fixed-point exactness",
               fmt("|e - sqrt 2| %.2e (< 1e-9)", root_err) + fmt(", scale rel err %.2e (< 1e-9)", scale_err) +
                   fmt(", max iterations over all scenarios %.0f (< 500)", max_iterations));
    }

    // 5. Rank-one identity, quadratic-form concentration, rank-one trace perturbation.
    {
        RandomStream rng(5);
        double l1 = 0.0;
        for (int t = 0; t < 100; ++t) {
            const CMat a = rng.complex_normal_matrix(4, 4);
            const CMat U = a * a.adjoint() + CMat::Identity(4, 4);
            const RankOneSides s = rank_one_update_identity(U, rng.complex_normal_vector(4), rng.uniform() * 5.0);
            l1 = std::max(l1, (s.lhs - s.rhs).norm() / s.rhs.norm());
        }
        const int n = 256;
        const TraceLemmaStats l2 = trace_lemma_oracle(CMat::Identity(n, n), 10000, 5);
        const double l2_bound = 0.2 / std::sqrt(static_cast<double>(n));
        double l3 = 0.0;
        for (int t = 0; t < 20; ++t) {
            const CMat a = rng.complex_normal_matrix(64, 64) / 8.0;
            const CMat b = rng.complex_normal_matrix(64, 64) / 8.0;
            const CMat A = a * a.adjoint();
            const CMat B = b * b.adjoint() + 0.5 * CMat::Identity(64, 64);
            const double normA = Eigen::SelfAdjointEigenSolver<CMat>(A).eigenvalues().maxCoeff();
            const double ratio = trace_perturbation(A, B, rng.complex_normal_vector(64)) / (10.0 * normA / 64.0);
            l3 = std::max(l3, ratio);
        }
        report(5, l1 < 1e-10 && l2.median_quadratic < l2_bound && l3 < 1.0, "rank-one, trace and perturbation lemmas",
               fmt("rank-one rel gap %.2e (< 1e-10)", l1) + fmt(", median |x^H x - 1| %.5f", l2.median_quadratic) +
                   fmt(" (< %.5f = 0.2/sqrt 256)", l2_bound) + fmt(", perturbation / (10 |A| / n) max %.3f (< 1)", l3));
    }

    // 6. LMMSE statistics.
    {
        ScenarioConfig c = make_config(2, 4, 2, 3);
        const Deployment dep(c, geometry_seed(1, 0));
        const EffectiveChannelStatistics& st = dep.stats();
        const int T = 10000;
        const Eigen::Index n = c.stacked_dim();
        const auto K = static_cast<std::size_t>(c.num_users);
        std::vector<CMat> cov(K, CMat::Zero(n, n)), orth(K, CMat::Zero(n, n));
        std::vector<RMat> orth_sq(K, RMat::Zero(n, n));
        for (int t = 0; t < T; ++t) {
            const BlockSample s = dep.draw_block(static_cast<std::uint64_t>(t));
            for (std::size_t k = 0; k < K; ++k) {
                const CVec& hh = s.estimate.hhat[k];
                const CMat prod = hh * (s.h[k] - hh).adjoint();
                cov[k] += hh * hh.adjoint();
                orth[k] += prod;
                orth_sq[k] += prod.cwiseAbs2();
            }
        }
        double worst_z = 0.0, worst_cov = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            const CMat C = st.C[k].dense();
            worst_cov = std::max(worst_cov, max_abs(cov[k] / T - C) / max_abs(C));
            const CMat mean = orth[k] / T;
            for (Eigen::Index a = 0; a < n; ++a)
                for (Eigen::Index b = 0; b < n; ++b) {
                    const double se = std::sqrt(std::max(orth_sq[k](a, b) / T - std::norm(mean(a, b)), 0.0) / T);
                    if (se > 0.0)
                        worst_z = std::max(worst_z, std::abs(mean(a, b)) / se);
                }
        }
        c.pilot_kind = PilotKind::Orthogonal;
        const Deployment orth_dep(c, geometry_seed(1, 0));
        double cross = 0.0;
        for (int k = 0; k < c.num_users; ++k)
            for (int j = 0; j < c.num_users; ++j)
                if (j != k)
                    cross = std::max(cross, max_abs(orth_dep.stats().cross(k, j).dense()));
        report(6, worst_z < 3.0 && worst_cov < 0.05 && cross < 1e-9, "LMMSE estimator (M=2 N=4 N_RF=2 K=3, 10^4 blocks)",
               fmt("orthogonality max |mean|/SE %.2f (< 3)", worst_z) + fmt(", Cov vs C %.4f of max (< 0.05)", worst_cov) +
                   fmt(", orthogonal-pilot cross %.1e (< 1e-9)", cross));
    }

    // 7. Combiner optimality.
    {
        const ScenarioConfig c = make_config(20, 8, 2, 8);
        const Deployment dep(c, geometry_seed(1, 0));
        const std::vector<double> p = dep.full_powers();
        const BlockDiag& D = dep.stats().D;
        RandomStream rng(7);
        int violations = 0;
        double gap = 0.0;
        for (int t = 0; t < 1000; ++t) {
            const EffectiveChannelEstimate est = dep.draw_block(static_cast<std::uint64_t>(t)).estimate;
            const std::vector<double> exact = uplink_sinr_exact(est, D, p);
            const std::vector<CVec> v = mmse_combiner(est, D, p);
            for (int k = 0; k < c.num_users; ++k) {
                const auto ku = static_cast<std::size_t>(k);
                const double best = combiner_sinr(est, D, p, k, v[ku]);
                gap = std::max(gap, std::abs(best - exact[ku]) / exact[ku]);
                if (combiner_sinr(est, D, p, k, est.hhat[ku]) > best)
                    ++violations;
                for (int r = 0; r < 10; ++r)
                    if (combiner_sinr(est, D, p, k, rng.complex_normal_vector(c.stacked_dim())) > best)
                        ++violations;
            }
        }
        report(7, violations == 0 && gap < 1e-9, "MMSE combiner optimality (desk scale, 10^3 blocks)",
               fmt("%.0f realizations beat MMSE (0 allowed)", violations) + fmt(", MMSE vs closed form %.2e (< 1e-9)", gap));
    }

    // 8. Max-min power control.
    {
        const ScenarioConfig c2 = make_config(20, 8, 2, 2);
        const Deployment d2(c2, geometry_seed(1, 0));
        const SinrFunction f2 = [&](std::span<const double> p) { return uplink_sinr_approx2(d2.stats(), p); };
        const std::vector<double> p0(2, 1.0);
        const MaxMinResult r2 = maxmin_power(f2, p0, c2.ul_power_mw);
        const GridOracleResult grid = power_grid_oracle(f2, 2, 100, c2.ul_power_mw);
        const double rel = (grid.best_min_sinr - r2.min_sinr) / grid.best_min_sinr;

        const ScenarioConfig c8 = make_config(20, 8, 2, 8);
        const Deployment d8(c8, geometry_seed(1, 0));
        const SinrFunction f8 = [&](std::span<const double> p) { return uplink_sinr_approx2(d8.stats(), p); };
        const MaxMinResult r8 = maxmin_power(f8, std::vector<double>(8, 1.0), c8.ul_power_mw);

        EffectiveChannelStatistics sym;
        sym.num_aps = 2;
        sym.num_users = 3;
        sym.rf_chains = 2;
        const BlockDiag C = BlockDiag::identity(2, 2);
        sym.C = {C, C, C};
        sym.Re = sym.C;
        sym.E.assign(3, 0.0 * C);
        sym.Cz = C;
        sym.D = C;
        const SinrFunction fs = [&](std::span<const double> p) { return uplink_sinr_approx2(sym, p); };
        const std::vector<double> ps{0.2, 1.0, 0.5};
        const MaxMinResult rs = maxmin_power(fs, ps, 20.0);
        double uniform = 0.0;
        for (double x : rs.p)
            uniform = std::max(uniform, std::abs(x - 1.0));

        report(8, rel <= 0.01 && r2.spread < 0.01 && r8.converged && r8.iterations < 500 && uniform < 1e-5,
               "max-min power control",
               fmt("K=2 shortfall vs 100x100 grid %.2e (<= 0.01)", rel) + fmt(", spread %.2e (< 0.01)", r2.spread) +
                   fmt(", K=8 iterations %.0f (< 500, converged)", r8.converged ? r8.iterations : 1e9) +
                   fmt(", symmetric max |p - 1| %.1e", uniform));
    }

    // 9. Structural invariants.
    {
        const ScenarioConfig c = make_config(20, 8, 2, 8);
        const Deployment dep(c, geometry_seed(1, 0));
        double modulus = 0.0;
        for (const CMat& W : dep.precoder().W)
            modulus = std::max(modulus, (W.cwiseAbs() * c.antennas_per_ap - RMat::Ones(W.rows(), W.cols())).cwiseAbs().maxCoeff());

        double worst_psd = 0.0;
        auto psd = [&](const CMat& a) { worst_psd = std::min(worst_psd, min_eig_ratio(a)); };
        for (const CMat& R : dep.correlations().R)
            psd(R);
        const EffectiveChannelStatistics& st = dep.stats();
        for (int k = 0; k < c.num_users; ++k)
            for (std::size_t m = 0; m < static_cast<std::size_t>(c.num_aps); ++m) {
                psd(st.Re[static_cast<std::size_t>(k)].block(m));
                psd(st.C[static_cast<std::size_t>(k)].block(m));
                psd(st.E[static_cast<std::size_t>(k)].block(m));
            }
        for (std::size_t m = 0; m < st.D.num_blocks(); ++m)
            psd(st.D.block(m));

        const std::vector<double> p = dep.full_powers();
        const FixedPointSolution fp = solve_fixed_point(p, st.C, st.D, 0.0, c.stacked_dim());
        const DerivativeEquivalent dv = solve_derivative(fp, st.C[0], p, st.C, c.stacked_dim());
        double off = 0.0;
        for (const BlockDiag* b : {&fp.T, &dv.Tprime}) {
            const CMat d = b->dense();
            for (Eigen::Index i = 0; i < d.rows(); ++i)
                for (Eigen::Index j = 0; j < d.cols(); ++j)
                    if (i / c.rf_chains != j / c.rf_chains)
                        off = std::max(off, std::abs(d(i, j)));
            for (std::size_t m = 0; m < b->num_blocks(); ++m)
                if (b == &fp.T)
                    psd(b->block(m));
        }

        Campaign camp;
        camp.scenario = make_config(4, 4, 2, 4);
        camp.geometry_draws = 3;
        camp.blocks_per_geometry = 50;
        camp.dl_trials = 100;
        camp.modes = {Method::ExactMC, Method::Approx1, Method::Approx2, Method::DlExactMC, Method::DlApprox};
        const auto base = std::filesystem::temp_directory_path() / "cfhb_acceptance";
        std::vector<std::string> outputs;
        const int saved = thread_count();
        for (int threads : {1, 3, 1}) {
            set_thread_count(threads);
            camp.output_dir = (base / std::to_string(outputs.size())).string();
            std::filesystem::remove_all(camp.output_dir);
            write_outputs(camp, run_campaign(camp));
            outputs.push_back(read_file(std::filesystem::path(camp.output_dir) / "samples.csv") +
                              read_file(std::filesystem::path(camp.output_dir) / "summary.json"));
        }
        set_thread_count(saved);
        std::filesystem::remove_all(base);
        const bool identical = outputs[0] == outputs[1] && outputs[1] == outputs[2] && !outputs[0].empty();

        report(9, modulus < 1e-12 && worst_psd > -1e-10 && off < 1e-12 && identical, "structural invariants",
               fmt("| N |w| - 1 | %.1e (< 1e-12)", modulus) + fmt(", min eig ratio %.1e (> -1e-10)", worst_psd) +
                   fmt(", off-block T/T' %.1e (< 1e-12)", off) +
                   std::string(", reruns with 1/3/1 threads ") + (identical ? "byte-identical" : "DIFFER"));
    }

    // 10. Rate prefactor.
    {
        ScenarioConfig c;
        c.coherence_len = 200;
        c.pilot_len = 16;
        const std::vector<double> one{1.0};
        const double ul = uplink_rate(one, c)[0];
        const double dl = downlink_rate(one, c)[0];
        const double direct = (200.0 - 16.0) / (2.0 * 200.0);
        report(10, std::abs(ul - 0.46) < 1e-12 && std::abs(dl - 0.46) < 1e-12 && std::abs(direct - 0.46) < 1e-12,
               "SE prefactor (tau_c=200, tau_p=16)", fmt("UL %.6f", ul) + fmt(", DL %.6f (0.46)", dl));
    }

    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("acceptance: %d of 10 criteria failed, %.1f s\n", failures, seconds);
    return failures == 0 ? 0 : 1;
}
