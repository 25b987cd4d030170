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

#include "cfhb/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "json.hpp"

#include "cfhb/deployment.hpp"
#include "cfhb/downlink.hpp"
#include "cfhb/errors.hpp"
#include "cfhb/parallel.hpp"

namespace cfhb {

int Campaign::effective_dl_trials() const noexcept
{
    return dl_trials > 0 ? dl_trials : std::max(100, blocks_per_geometry);
}

void Campaign::validate() const
{
    scenario.validate();
    if (geometry_draws < 1)
        throw ConfigError("campaign: geometry_draws must be >= 1");
    if (first_geometry < 0)
        throw ConfigError("campaign: first_geometry must be >= 0");
    if (blocks_per_geometry < 1)
        throw ConfigError("campaign: blocks_per_geometry must be >= 1");
    if (dl_trials != 0 && dl_trials < 100)
        throw ConfigError("campaign: dl_trials must be >= 100");
    if (power_batch < 0)
        throw ConfigError("campaign: power_batch must be >= 0");
    if (power_utility != Method::ExactMC && power_utility != Method::Approx1 && power_utility != Method::Approx2)
        throw ConfigError("campaign: power utility must be exact_mc, approx1 or approx2");
}

// ---------------------------------------------------------------------------
// CDF

EmpiricalCdf::EmpiricalCdf(std::vector<double> samples) : values_(std::move(samples))
{
    if (values_.empty())
        throw ConfigError("empirical_cdf: no samples");
    for (double v : values_)
        if (std::isnan(v))
            throw ConfigError("empirical_cdf: NaN sample");
    std::sort(values_.begin(), values_.end());
}

double EmpiricalCdf::operator()(double x) const
{
    const auto it = std::upper_bound(values_.begin(), values_.end(), x);
    return static_cast<double>(it - values_.begin()) / static_cast<double>(values_.size());
}

double EmpiricalCdf::quantile(double q) const
{
    if (!(q >= 0.0 && q <= 1.0))
        throw ConfigError("quantile: q must lie in [0, 1]");
    const double pos = q * static_cast<double>(values_.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    if (lo + 1 >= values_.size())
        return values_.back();
    const double frac = pos - static_cast<double>(lo);
    return values_[lo] + frac * (values_[lo + 1] - values_[lo]);
}

EmpiricalCdf empirical_cdf(std::vector<double> samples) { return EmpiricalCdf(std::move(samples)); }

OutageSummary summarize(const std::string& mode, std::vector<double> se)
{
    const EmpiricalCdf cdf(std::move(se));
    OutageSummary s;
    s.mode = mode;
    s.n_samples = cdf.size();
    s.mean_se = std::accumulate(cdf.values().begin(), cdf.values().end(), 0.0) / static_cast<double>(cdf.size());
    s.outage95_se = cdf.quantile(0.05);
    s.median_se = cdf.quantile(0.5);
    s.max_se = cdf.values().back();
    s.cdf_grid.resize(101);
    for (int i = 0; i <= 100; ++i)
        s.cdf_grid[static_cast<std::size_t>(i)] = cdf.quantile(i / 100.0);
    return s;
}

// ---------------------------------------------------------------------------
// Campaign driver

namespace {

struct GeometryOutput {
    std::vector<SampleRow> rows;
    PowerRecord power;
    bool has_power = false;
};

void append(std::vector<SampleRow>& rows, int g, std::int64_t block, const std::string& mode,
            const std::vector<double>& sinr, double prefactor)
{
    for (std::size_t k = 0; k < sinr.size(); ++k)
        rows.push_back({g, block, static_cast<int>(k), mode, sinr[k], spectral_efficiency(sinr[k], prefactor)});
}

// Exact uplink SINR on every block; blocks run in parallel unless the caller
// already is a parallel worker.
void exact_blocks(std::vector<SampleRow>& rows, const Deployment& dep, int g, int blocks,
                  const std::vector<double>& powers, const std::string& mode)
{
    const BlockDiag D = assemble_d(dep.stats(), powers);
    std::vector<std::vector<double>> sinr(static_cast<std::size_t>(blocks));
    parallel_for(sinr.size(), [&](std::size_t b) {
        try {
            const BlockSample s = dep.draw_block(b);
            sinr[b] = uplink_sinr_exact(s.estimate, D, powers);
        } catch (const std::exception& e) {
            throw CampaignError(std::string(mode) + ": " + e.what(), g, static_cast<std::int64_t>(b));
        }
    });
    const double pre = dep.config().se_prefactor();
    for (std::size_t b = 0; b < sinr.size(); ++b)
        append(rows, g, static_cast<std::int64_t>(b), mode, sinr[b], pre);
}

SinrFunction utility_function(const Deployment& dep, Method utility, int batch_size,
                              std::shared_ptr<std::vector<EffectiveChannelEstimate>>& batch)
{
    switch (utility) {
    case Method::Approx1:
        return [&dep](std::span<const double> p) { return uplink_sinr_approx1(dep.stats(), p); };
    case Method::Approx2:
        return [&dep](std::span<const double> p) { return uplink_sinr_approx2(dep.stats(), p); };
    case Method::ExactMC: {
        batch = std::make_shared<std::vector<EffectiveChannelEstimate>>(static_cast<std::size_t>(batch_size));
        parallel_for(batch->size(), [&](std::size_t b) { (*batch)[b] = dep.draw_block(b).estimate; });
        auto held = batch;
        return [&dep, held](std::span<const double> p) { return uplink_sinr_exact_mean(*held, dep.stats(), p); };
    }
    default:
        throw ConfigError("power utility must be exact_mc, approx1 or approx2");
    }
}

PowerRecord optimize_power(const Campaign& c, const Deployment& dep, int g)
{
    const int batch_size = c.power_batch > 0 ? c.power_batch : std::min(c.blocks_per_geometry, 100);
    std::shared_ptr<std::vector<EffectiveChannelEstimate>> batch;
    const SinrFunction fn = utility_function(dep, c.power_utility, batch_size, batch);
    const std::vector<double> p0(static_cast<std::size_t>(c.scenario.num_users), 1.0);
    try {
        const MaxMinResult r = maxmin_power(fn, p0, c.scenario.ul_power_mw);
        return PowerRecord{g, r.powers, r.sinr, r.iterations, r.converged};
    } catch (const std::exception& e) {
        throw CampaignError(std::string("power optimization: ") + e.what(), g, -1);
    }
}

GeometryOutput evaluate_geometry(const Campaign& c, int g, bool power_experiment)
{
    GeometryOutput out;
    const std::uint64_t seed = geometry_seed(c.seed(), static_cast<std::uint64_t>(g));
    std::unique_ptr<Deployment> dep;
    try {
        dep = std::make_unique<Deployment>(c.scenario, seed);
    } catch (const std::exception& e) {
        throw CampaignError(std::string("deployment: ") + e.what(), g, -1);
    }
    const double pre = c.scenario.se_prefactor();
    const std::vector<double> full = dep->full_powers();

    if (power_experiment) {
        out.power = optimize_power(c, *dep, g);
        out.has_power = true;
        append(out.rows, g, -1, std::string(method_name(c.power_utility)) + "_maxmin", out.power.utility_sinr, pre);
        exact_blocks(out.rows, *dep, g, c.blocks_per_geometry, full, method_name(Method::ExactMC));
        exact_blocks(out.rows, *dep, g, c.blocks_per_geometry, out.power.powers, kMaxMinMode);
        return out;
    }

    for (Method mode : c.modes) {
        const std::string name = method_name(mode);
        try {
            switch (mode) {
            case Method::ExactMC:
                exact_blocks(out.rows, *dep, g, c.blocks_per_geometry, full, name);
                break;
            case Method::Approx1:
                append(out.rows, g, -1, name, uplink_sinr_approx1(dep->stats(), full), pre);
                break;
            case Method::Approx2:
                append(out.rows, g, -1, name, uplink_sinr_approx2(dep->stats(), full), pre);
                break;
            case Method::DlExactMC: {
                const std::vector<double> pd(full.size(), c.scenario.dl_power_mw);
                append(out.rows, g, -1, name, downlink_sinr_exact_mc(*dep, pd, c.effective_dl_trials()).sinr, pre);
                break;
            }
            case Method::DlApprox: {
                const std::vector<double> pd(full.size(), c.scenario.dl_power_mw);
                append(out.rows, g, -1, name, downlink_sinr_approx(dep->stats(), pd, c.scenario.rho()).sinr, pre);
                break;
            }
            }
        } catch (const CampaignError&) {
            throw;
        } catch (const std::exception& e) {
            throw CampaignError(name + ": " + e.what(), g, -1);
        }
    }
    if (c.power_opt) {
        Campaign opt = c;
        opt.power_utility = Method::Approx2;
        out.power = optimize_power(opt, *dep, g);
        out.has_power = true;
        exact_blocks(out.rows, *dep, g, c.blocks_per_geometry, out.power.powers, kMaxMinMode);
    }
    return out;
}

CampaignResult collect(const Campaign& c, bool power_experiment)
{
    c.validate();
    std::vector<GeometryOutput> per_geometry(static_cast<std::size_t>(c.geometry_draws));
    parallel_for(per_geometry.size(), [&](std::size_t i) {
        per_geometry[i] = evaluate_geometry(c, c.first_geometry + static_cast<int>(i), power_experiment);
    });

    CampaignResult result;
    std::vector<std::string> order;
    std::vector<std::vector<double>> pooled;
    for (GeometryOutput& go : per_geometry) {
        for (SampleRow& row : go.rows) {
            auto it = std::find(order.begin(), order.end(), row.mode);
            if (it == order.end()) {
                order.push_back(row.mode);
                pooled.emplace_back();
                it = order.end() - 1;
            }
            pooled[static_cast<std::size_t>(it - order.begin())].push_back(row.se);
            result.rows.push_back(std::move(row));
        }
        if (go.has_power)
            result.power.push_back(std::move(go.power));
    }
    for (std::size_t i = 0; i < order.size(); ++i)
        result.summaries.push_back(summarize(order[i], std::move(pooled[i])));
    if (!c.output_dir.empty())
        write_outputs(c, result);
    return result;
}

std::string fmt(double v)
{
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

} // namespace

CampaignResult run_campaign(const Campaign& campaign) { return collect(campaign, false); }

CampaignResult run_power_opt(const Campaign& campaign) { return collect(campaign, true); }

// ---------------------------------------------------------------------------
// Serialization

std::string samples_csv(const std::vector<SampleRow>& rows)
{
    std::string out = "geometry_id,block_id,user,mode,sinr_linear,se_bps_hz\n";
    for (const SampleRow& r : rows) {
        out += std::to_string(r.geometry_id);
        out += ',';
        out += std::to_string(r.block_id);
        out += ',';
        out += std::to_string(r.user);
        out += ',';
        out += r.mode;
        out += ',';
        out += fmt(r.sinr);
        out += ',';
        out += fmt(r.se);
        out += '\n';
    }
    return out;
}

std::string power_csv(const std::vector<PowerRecord>& records)
{
    std::string out = "geometry_id,user,power_mw,utility_sinr,iterations,converged\n";
    for (const PowerRecord& r : records)
        for (std::size_t k = 0; k < r.powers.size(); ++k)
            out += std::to_string(r.geometry_id) + ',' + std::to_string(k) + ',' + fmt(r.powers[k]) + ',' +
                   fmt(r.utility_sinr[k]) + ',' + std::to_string(r.iterations) + ',' +
                   (r.converged ? "1" : "0") + '\n';
    return out;
}

std::string summary_json(const Campaign& campaign, const CampaignResult& result)
{
    nlohmann::ordered_json doc;
    doc["config_fingerprint"] = config_fingerprint(campaign.scenario);
    doc["seed"] = campaign.seed();
    doc["geometry_draws"] = campaign.geometry_draws;
    doc["first_geometry"] = campaign.first_geometry;
    doc["blocks_per_geometry"] = campaign.blocks_per_geometry;
    doc["dl_trials"] = campaign.effective_dl_trials();
    doc["se_prefactor"] = campaign.scenario.se_prefactor();
    nlohmann::ordered_json modes = nlohmann::ordered_json::object();
    for (const OutageSummary& s : result.summaries) {
        nlohmann::ordered_json m;
        m["mean_se"] = s.mean_se;
        m["outage95_se"] = s.outage95_se;
        m["median_se"] = s.median_se;
        m["max_se"] = s.max_se;
        m["n_samples"] = s.n_samples;
        m["cdf_quantiles"] = s.cdf_grid;
        modes[s.mode] = std::move(m);
    }
    doc["modes"] = std::move(modes);
    if (!result.power.empty()) {
        nlohmann::ordered_json power = nlohmann::ordered_json::array();
        for (const PowerRecord& r : result.power)
            power.push_back({{"geometry_id", r.geometry_id},
                             {"iterations", r.iterations},
                             {"converged", r.converged},
                             {"powers_mw", r.powers},
                             {"utility_sinr", r.utility_sinr}});
        doc["power_opt"] = std::move(power);
    }
    return doc.dump(2) + "\n";
}

void write_outputs(const Campaign& campaign, const CampaignResult& result)
{
    namespace fs = std::filesystem;
    const fs::path dir(campaign.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
    auto write = [&](const char* name, const std::string& text) {
        std::ofstream f(dir / name, std::ios::binary);
        f << text;
        if (!f)
            throw ConfigError("cannot write " + (dir / name).string());
    };
    write("samples.csv", samples_csv(result.rows));
    write("summary.json", summary_json(campaign, result));
    if (!result.power.empty())
        write("power.csv", power_csv(result.power));
}

} // namespace cfhb
