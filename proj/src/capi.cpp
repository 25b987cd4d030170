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

#include "cfhb.h"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <sstream>
#include <stdexcept>
#include <string>

#include "cfhb/errors.hpp"
#include "cfhb/harness.hpp"
#include "cfhb/parallel.hpp"
#include "cfhb/validation.hpp"

struct cfhb_config {
    cfhb::ScenarioConfig value;
};

struct cfhb_result {
    cfhb::Campaign campaign;
    cfhb::CampaignResult value;
};

struct cfhb_validation {
    std::vector<cfhb::OracleReport> reports;
};

namespace {

thread_local std::string g_error;
thread_local int g_error_geometry = -1;
thread_local std::int64_t g_error_block = -1;

cfhb_status fail(cfhb_status status, const std::string& message)
{
    g_error = message;
    return status;
}

// Maps the exception in flight to a status code.
cfhb_status translate()
{
    g_error_geometry = -1;
    g_error_block = -1;
    try {
        throw;
    } catch (const cfhb::CampaignError& e) {
        g_error_geometry = e.geometry();
        g_error_block = e.block();
        std::ostringstream msg;
        msg << "geometry " << e.geometry() << ", block " << e.block() << ": " << e.what();
        return fail(CFHB_ERR_NUMERICAL, msg.str());
    } catch (const cfhb::ConfigError& e) {
        return fail(CFHB_ERR_CONFIG, e.what());
    } catch (const cfhb::DimensionError& e) {
        return fail(CFHB_ERR_DIMENSION, e.what());
    } catch (const cfhb::NumericalError& e) {
        return fail(CFHB_ERR_NUMERICAL, e.what());
    } catch (const std::invalid_argument& e) {
        return fail(CFHB_ERR_INVALID_ARGUMENT, e.what());
    } catch (const std::bad_alloc&) {
        return fail(CFHB_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(CFHB_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(CFHB_ERR_INTERNAL, "unknown error");
    }
}

template <class F>
cfhb_status guarded(F&& f)
{
    try {
        f();
        g_error.clear();
        return CFHB_OK;
    } catch (...) {
        return translate();
    }
}

cfhb_status null_arg(const char* fn) { return fail(CFHB_ERR_INVALID_ARGUMENT, std::string(fn) + ": null argument"); }

std::vector<cfhb::Method> parse_modes(const char* list)
{
    std::vector<cfhb::Method> modes;
    std::string s(list);
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const std::size_t comma = s.find(',', pos);
        std::string item = s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        item = b == std::string::npos ? std::string() : item.substr(b, e - b + 1);
        if (!item.empty()) {
            const auto m = cfhb::parse_method(item);
            if (!m)
                throw std::invalid_argument("unknown mode '" + item + "'");
            if (std::find(modes.begin(), modes.end(), *m) == modes.end())
                modes.push_back(*m);
        }
        if (comma == std::string::npos)
            break;
        pos = comma + 1;
    }
    if (modes.empty())
        throw cfhb::ConfigError("empty mode list");
    return modes;
}

cfhb::Campaign make_campaign(const cfhb_config* config, const cfhb_campaign_options* o)
{
    cfhb::Campaign c;
    c.scenario = config->value;
    if (o->has_seed)
        c.scenario.master_seed = o->seed;
    c.geometry_draws = o->geometry_draws;
    c.first_geometry = o->first_geometry;
    c.blocks_per_geometry = o->blocks_per_geometry;
    c.dl_trials = o->dl_trials;
    c.power_opt = o->power_opt != 0;
    c.power_batch = o->power_batch;
    if (o->modes)
        c.modes = parse_modes(o->modes);
    if (o->power_utility) {
        const auto m = cfhb::parse_method(o->power_utility);
        if (!m)
            throw std::invalid_argument(std::string("unknown power utility '") + o->power_utility + "'");
        c.power_utility = *m;
    }
    if (o->output_dir)
        c.output_dir = o->output_dir;
    c.validate();
    return c;
}

cfhb_status run(const cfhb_config* config, const cfhb_campaign_options* options, cfhb_result** out, bool power)
{
    if (!config || !options || !out)
        return null_arg(power ? "cfhb_run_power_opt" : "cfhb_run_campaign");
    *out = nullptr;
    return guarded([&] {
        auto r = std::make_unique<cfhb_result>();
        r->campaign = make_campaign(config, options);
        r->value = power ? cfhb::run_power_opt(r->campaign) : cfhb::run_campaign(r->campaign);
        *out = r.release();
    });
}

const cfhb::OutageSummary* find_summary(const cfhb_result* r, const char* mode)
{
    for (const cfhb::OutageSummary& s : r->value.summaries)
        if (s.mode == mode)
            return &s;
    return nullptr;
}

} // namespace

extern "C" {

const char* cfhb_version(void) { return "1.0.0"; }

const char* cfhb_last_error(void) { return g_error.c_str(); }

void cfhb_last_error_location(int* geometry, int64_t* block)
{
    if (geometry)
        *geometry = g_error_geometry;
    if (block)
        *block = g_error_block;
}

const char* cfhb_status_string(cfhb_status status)
{
    switch (status) {
    case CFHB_OK: return "ok";
    case CFHB_ERR_INVALID_ARGUMENT: return "invalid argument";
    case CFHB_ERR_CONFIG: return "configuration error";
    case CFHB_ERR_DIMENSION: return "dimension error";
    case CFHB_ERR_NUMERICAL: return "numerical error";
    case CFHB_ERR_IO: return "i/o error";
    case CFHB_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

void cfhb_set_threads(int threads) { cfhb::set_thread_count(threads); }

cfhb_status cfhb_config_create(cfhb_config** out)
{
    if (!out)
        return null_arg("cfhb_config_create");
    *out = nullptr;
    return guarded([&] { *out = new cfhb_config{}; });
}

cfhb_status cfhb_config_load(const char* path, cfhb_config** out)
{
    if (!path || !out)
        return null_arg("cfhb_config_load");
    *out = nullptr;
    return guarded([&] { *out = new cfhb_config{cfhb::load_config(path)}; });
}

cfhb_status cfhb_config_parse(const char* text, cfhb_config** out)
{
    if (!text || !out)
        return null_arg("cfhb_config_parse");
    *out = nullptr;
    return guarded([&] { *out = new cfhb_config{cfhb::parse_config(text)}; });
}

cfhb_status cfhb_config_set(cfhb_config* config, const char* key, const char* value)
{
    if (!config || !key || !value)
        return null_arg("cfhb_config_set");
    return guarded([&] {
        cfhb::ScenarioConfig copy = config->value;
        cfhb::apply_config_value(copy, key, value);
        config->value = copy;
    });
}

cfhb_status cfhb_config_validate(const cfhb_config* config)
{
    if (!config)
        return null_arg("cfhb_config_validate");
    return guarded([&] { config->value.validate(); });
}

cfhb_status cfhb_config_format(const cfhb_config* config, char* buffer, size_t capacity, size_t* needed)
{
    if (!config)
        return null_arg("cfhb_config_format");
    return guarded([&] {
        const std::string text = cfhb::format_config(config->value);
        if (needed)
            *needed = text.size() + 1;
        if (buffer && capacity > 0) {
            const std::size_t n = std::min(capacity - 1, text.size());
            std::memcpy(buffer, text.data(), n);
            buffer[n] = '\0';
        }
    });
}

cfhb_status cfhb_config_fingerprint(const cfhb_config* config, char out[17])
{
    if (!config || !out)
        return null_arg("cfhb_config_fingerprint");
    return guarded([&] {
        const std::string fp = cfhb::config_fingerprint(config->value);
        std::memcpy(out, fp.c_str(), 17);
    });
}

cfhb_status cfhb_config_se_prefactor(const cfhb_config* config, double* out)
{
    if (!config || !out)
        return null_arg("cfhb_config_se_prefactor");
    return guarded([&] { *out = config->value.se_prefactor(); });
}

void cfhb_config_destroy(cfhb_config* config) { delete config; }

void cfhb_campaign_options_init(cfhb_campaign_options* options)
{
    if (!options)
        return;
    *options = cfhb_campaign_options{};
    options->geometry_draws = 1;
    options->blocks_per_geometry = 1;
}

cfhb_status cfhb_run_campaign(const cfhb_config* config, const cfhb_campaign_options* options, cfhb_result** out)
{
    return run(config, options, out, false);
}

cfhb_status cfhb_run_power_opt(const cfhb_config* config, const cfhb_campaign_options* options, cfhb_result** out)
{
    return run(config, options, out, true);
}

size_t cfhb_result_mode_count(const cfhb_result* result) { return result ? result->value.summaries.size() : 0; }

cfhb_status cfhb_result_mode_summary(const cfhb_result* result, size_t index, cfhb_mode_summary* out)
{
    if (!result || !out)
        return null_arg("cfhb_result_mode_summary");
    if (index >= result->value.summaries.size())
        return fail(CFHB_ERR_INVALID_ARGUMENT, "cfhb_result_mode_summary: index out of range");
    const cfhb::OutageSummary& s = result->value.summaries[index];
    *out = {s.mode.c_str(), s.n_samples, s.mean_se, s.outage95_se, s.median_se, s.max_se};
    return CFHB_OK;
}

cfhb_status cfhb_result_quantile(const cfhb_result* result, const char* mode, double q, double* out)
{
    if (!result || !mode || !out)
        return null_arg("cfhb_result_quantile");
    if (!find_summary(result, mode))
        return fail(CFHB_ERR_INVALID_ARGUMENT, std::string("cfhb_result_quantile: no samples for mode ") + mode);
    return guarded([&] {
        std::vector<double> se;
        for (const cfhb::SampleRow& r : result->value.rows)
            if (r.mode == mode)
                se.push_back(r.se);
        *out = cfhb::empirical_cdf(std::move(se)).quantile(q);
    });
}

size_t cfhb_result_sample_count(const cfhb_result* result) { return result ? result->value.rows.size() : 0; }

cfhb_status cfhb_result_sample(const cfhb_result* result, size_t index, cfhb_sample* out)
{
    if (!result || !out)
        return null_arg("cfhb_result_sample");
    if (index >= result->value.rows.size())
        return fail(CFHB_ERR_INVALID_ARGUMENT, "cfhb_result_sample: index out of range");
    const cfhb::SampleRow& r = result->value.rows[index];
    *out = {r.geometry_id, r.block_id, r.user, r.mode.c_str(), r.sinr, r.se};
    return CFHB_OK;
}

size_t cfhb_result_power_count(const cfhb_result* result) { return result ? result->value.power.size() : 0; }

cfhb_status cfhb_result_power(const cfhb_result* result, size_t index, int* geometry_id, int* iterations,
                              int* converged, const double** powers_mw, size_t* num_users)
{
    if (!result)
        return null_arg("cfhb_result_power");
    if (index >= result->value.power.size())
        return fail(CFHB_ERR_INVALID_ARGUMENT, "cfhb_result_power: index out of range");
    const cfhb::PowerRecord& p = result->value.power[index];
    if (geometry_id)
        *geometry_id = p.geometry_id;
    if (iterations)
        *iterations = p.iterations;
    if (converged)
        *converged = p.converged ? 1 : 0;
    if (powers_mw)
        *powers_mw = p.powers.data();
    if (num_users)
        *num_users = p.powers.size();
    return CFHB_OK;
}

cfhb_status cfhb_result_write(const cfhb_result* result, const char* dir)
{
    if (!result || !dir)
        return null_arg("cfhb_result_write");
    try {
        cfhb::Campaign c = result->campaign;
        c.output_dir = dir;
        cfhb::write_outputs(c, result->value);
        g_error.clear();
        return CFHB_OK;
    } catch (const cfhb::ConfigError& e) {
        return fail(CFHB_ERR_IO, e.what());
    } catch (...) {
        return translate();
    }
}

void cfhb_result_destroy(cfhb_result* result) { delete result; }

cfhb_status cfhb_run_validation(uint64_t seed, int trials, int grid_resolution, cfhb_validation** out)
{
    if (!out)
        return null_arg("cfhb_run_validation");
    *out = nullptr;
    return guarded([&] {
        cfhb::ValidationOptions o;
        o.seed = seed;
        o.trials = trials;
        o.grid_resolution = grid_resolution;
        *out = new cfhb_validation{cfhb::run_validation(o)};
    });
}

size_t cfhb_validation_count(const cfhb_validation* validation)
{
    return validation ? validation->reports.size() : 0;
}

cfhb_status cfhb_validation_entry(const cfhb_validation* validation, size_t index, cfhb_oracle_report* out)
{
    if (!validation || !out)
        return null_arg("cfhb_validation_entry");
    if (index >= validation->reports.size())
        return fail(CFHB_ERR_INVALID_ARGUMENT, "cfhb_validation_entry: index out of range");
    const cfhb::OracleReport& r = validation->reports[index];
    *out = {r.check.c_str(), r.instance.c_str(), r.oracle, r.artifact, r.tolerance, r.pass ? 1 : 0};
    return CFHB_OK;
}

cfhb_status cfhb_validation_write_csv(const cfhb_validation* validation, const char* path)
{
    if (!validation || !path)
        return null_arg("cfhb_validation_write_csv");
    std::FILE* f = std::fopen(path, "wb");
    if (!f)
        return fail(CFHB_ERR_IO, std::string("cannot open ") + path);
    const std::string text = cfhb::oracle_report_csv(validation->reports);
    const bool ok = std::fwrite(text.data(), 1, text.size(), f) == text.size();
    if (std::fclose(f) != 0 || !ok)
        return fail(CFHB_ERR_IO, std::string("cannot write ") + path);
    return CFHB_OK;
}

void cfhb_validation_destroy(cfhb_validation* validation) { delete validation; }

double cfhb_spectral_efficiency(double sinr, double prefactor) { return cfhb::spectral_efficiency(sinr, prefactor); }

cfhb_status cfhb_scalar_fixed_point(double P, double c, double d, double n, double* out)
{
    if (!out)
        return null_arg("cfhb_scalar_fixed_point");
    return guarded([&] { *out = cfhb::scalar_fixed_point_oracle(P, c, d, n); });
}

} // extern "C"
