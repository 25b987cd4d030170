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

// Command-line front end. Uses only the C interface in cfhb.h.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cfhb.h"

namespace {

struct Handle {
    cfhb_config* config = nullptr;
    cfhb_result* result = nullptr;
    cfhb_validation* validation = nullptr;
    ~Handle()
    {
        cfhb_config_destroy(config);
        cfhb_result_destroy(result);
        cfhb_validation_destroy(validation);
    }
};

int report_failure(const char* what, cfhb_status status)
{
    int geometry = -1;
    int64_t block = -1;
    cfhb_last_error_location(&geometry, &block);
    std::fprintf(stderr, "cfhb: %s failed (%s): %s\n", what, cfhb_status_string(status), cfhb_last_error());
    if (geometry >= 0)
        std::fprintf(stderr, "cfhb: failing coordinates: geometry %d, block %lld\n", geometry,
                     static_cast<long long>(block));
    return 1;
}

int load(Handle& h, const std::string& path, const std::vector<std::string>& overrides)
{
    cfhb_status st = cfhb_config_load(path.c_str(), &h.config);
    if (st != CFHB_OK)
        return report_failure("loading config", st);
    for (const std::string& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) {
            std::fprintf(stderr, "cfhb: --set expects key=value, got '%s'\n", kv.c_str());
            return 2;
        }
        st = cfhb_config_set(h.config, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str());
        if (st != CFHB_OK)
            return report_failure("applying --set", st);
    }
    st = cfhb_config_validate(h.config);
    if (st != CFHB_OK)
        return report_failure("validating config", st);
    return 0;
}

void print_summary(const cfhb_result* r)
{
    std::printf("%-18s %10s %10s %12s %10s\n", "mode", "samples", "mean_se", "outage95_se", "median_se");
    for (size_t i = 0; i < cfhb_result_mode_count(r); ++i) {
        cfhb_mode_summary s;
        if (cfhb_result_mode_summary(r, i, &s) == CFHB_OK)
            std::printf("%-18s %10zu %10.4f %12.4f %10.4f\n", s.mode, s.n_samples, s.mean_se, s.outage95_se,
                        s.median_se);
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Cell-free massive MIMO with hybrid beamforming: Monte Carlo campaigns and oracles"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(cfhb_version()));

    std::string config_path;
    std::uint64_t seed = 0;
    std::string out_dir;
    std::string modes = "exact_mc,approx2";
    int trials = 0;
    int geometries = 1;
    int first_geometry = 0;
    int threads = 0;
    int grid = 100;
    bool add_power_opt = false;
    std::string utility = "approx2";
    std::vector<std::string> overrides;

    auto common = [&](CLI::App* sub, bool need_config) {
        auto* c = sub->add_option("--config", config_path, "Scenario file (key = value lines)");
        if (need_config)
            c->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "Master seed (overrides the config file)");
        sub->add_option("--out", out_dir, "Output directory");
        sub->add_option("--threads", threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
    };

    CLI::App* run = app.add_subcommand("run", "Monte Carlo campaign over geometries and coherence blocks");
    common(run, true);
    run->add_option("--modes", modes, "Comma list: exact_mc, approx1, approx2, dl_exact_mc, dl_approx")
        ->capture_default_str();
    run->add_option("--trials", trials, "Coherence blocks per geometry (downlink MC uses max(100, N))")
        ->check(CLI::PositiveNumber);
    run->add_option("--geometries", geometries, "Geometry draws")->check(CLI::PositiveNumber)->capture_default_str();
    run->add_option("--first-geometry", first_geometry, "Id of the first geometry draw")
        ->check(CLI::NonNegativeNumber);
    run->add_flag("--power-opt", add_power_opt, "Also sample exact SINR at max-min (approx2) powers");
    run->add_option("--set", overrides, "Override a config key (key=value), repeatable");

    CLI::App* popt = app.add_subcommand("power-opt", "Max-min uplink power optimization experiment");
    common(popt, true);
    popt->add_option("--trials", trials, "Coherence blocks per geometry for the exact evaluation")
        ->check(CLI::PositiveNumber);
    popt->add_option("--geometries", geometries, "Geometry draws")->check(CLI::PositiveNumber)->capture_default_str();
    popt->add_option("--utility", utility, "SINR used by the optimizer: exact_mc, approx1, approx2")
        ->capture_default_str();
    popt->add_option("--set", overrides, "Override a config key (key=value), repeatable");

    CLI::App* val = app.add_subcommand("validate", "Run the oracle suite");
    common(val, false);
    val->add_option("--trials", trials, "Monte Carlo draws per check")->check(CLI::PositiveNumber);
    val->add_option("--grid", grid, "Power grid resolution per user")->check(CLI::PositiveNumber)
        ->capture_default_str();

    CLI11_PARSE(app, argc, argv);
    cfhb_set_threads(threads);
    Handle h;

    if (val->parsed()) {
        const std::uint64_t s = val->count("--seed") ? seed : 1;
        const cfhb_status st = cfhb_run_validation(s, trials > 0 ? trials : 200, grid, &h.validation);
        if (st != CFHB_OK)
            return report_failure("validation", st);
        int failed = 0;
        for (size_t i = 0; i < cfhb_validation_count(h.validation); ++i) {
            cfhb_oracle_report r;
            cfhb_validation_entry(h.validation, i, &r);
            std::printf("%s %-26s oracle=%-14.8g artifact=%-14.8g tol=%-8.3g %s\n", r.pass ? "PASS" : "FAIL",
                        r.check, r.oracle, r.artifact, r.tolerance, r.instance);
            failed += r.pass ? 0 : 1;
        }
        if (!out_dir.empty()) {
            std::error_code ec;
            std::filesystem::create_directories(out_dir, ec);
            const std::string path = (std::filesystem::path(out_dir) / "validation.csv").string();
            const cfhb_status w = cfhb_validation_write_csv(h.validation, path.c_str());
            if (w != CFHB_OK)
                return report_failure("writing validation.csv", w);
        }
        return failed == 0 ? 0 : 1;
    }

    if (const int rc = load(h, config_path, overrides))
        return rc;

    cfhb_campaign_options opt;
    cfhb_campaign_options_init(&opt);
    CLI::App* sub = run->parsed() ? run : popt;
    if (sub->count("--seed")) {
        opt.has_seed = 1;
        opt.seed = seed;
    }
    opt.geometry_draws = geometries;
    opt.first_geometry = first_geometry;
    opt.blocks_per_geometry = trials > 0 ? trials : 100;
    opt.output_dir = out_dir.empty() ? nullptr : out_dir.c_str();

    cfhb_status st;
    if (run->parsed()) {
        opt.modes = modes.c_str();
        opt.power_opt = add_power_opt ? 1 : 0;
        st = cfhb_run_campaign(h.config, &opt, &h.result);
    } else {
        opt.power_utility = utility.c_str();
        st = cfhb_run_power_opt(h.config, &opt, &h.result);
    }
    if (st != CFHB_OK)
        return report_failure(run->parsed() ? "campaign" : "power optimization", st);

    print_summary(h.result);
    for (size_t i = 0; i < cfhb_result_power_count(h.result); ++i) {
        int g = 0, iters = 0, conv = 0;
        const double* p = nullptr;
        size_t K = 0;
        cfhb_result_power(h.result, i, &g, &iters, &conv, &p, &K);
        std::printf("geometry %d: %d iterations%s, powers [mW]:", g, iters, conv ? "" : " (not converged)");
        for (size_t k = 0; k < K; ++k)
            std::printf(" %.4g", p[k]);
        std::printf("\n");
    }
    if (!out_dir.empty())
        std::printf("wrote %s/samples.csv and summary.json\n", out_dir.c_str());
    return 0;
}
