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

#include <cerrno>
#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cfhb/errors.hpp"
#include "cfhb/scenario.hpp"

namespace cfhb {

namespace {

std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

double to_double(const std::string& key, const std::string& value)
{
    const char* begin = value.c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0' || errno == ERANGE)
        throw ConfigError("config key '" + key + "': expected a number, got '" + value + "'");
    return v;
}

int to_int(const std::string& key, const std::string& value)
{
    const char* begin = value.c_str();
    char* end = nullptr;
    errno = 0;
    const long v = std::strtol(begin, &end, 10);
    if (end == begin || *end != '\0' || errno == ERANGE || v < -2147483647L || v > 2147483647L)
        throw ConfigError("config key '" + key + "': expected an integer, got '" + value + "'");
    return static_cast<int>(v);
}

std::uint64_t to_u64(const std::string& key, const std::string& value)
{
    const char* begin = value.c_str();
    char* end = nullptr;
    errno = 0;
    if (!value.empty() && value.front() == '-')
        throw ConfigError("config key '" + key + "': expected an unsigned integer");
    const unsigned long long v = std::strtoull(begin, &end, 0);
    if (end == begin || *end != '\0' || errno == ERANGE)
        throw ConfigError("config key '" + key + "': expected an unsigned integer, got '" + value + "'");
    return static_cast<std::uint64_t>(v);
}

const char* correlation_name(CorrelationKind k)
{
    switch (k) {
    case CorrelationKind::LocalScattering: return "local_scattering";
    case CorrelationKind::Exponential: return "exponential";
    case CorrelationKind::Identity: return "identity";
    }
    return "?";
}

} // namespace

void apply_config_value(ScenarioConfig& c, const std::string& key, const std::string& value)
{
    if (key == "num_aps") c.num_aps = to_int(key, value);
    else if (key == "antennas_per_ap") c.antennas_per_ap = to_int(key, value);
    else if (key == "rf_chains") c.rf_chains = to_int(key, value);
    else if (key == "num_users") c.num_users = to_int(key, value);
    else if (key == "coherence_len") c.coherence_len = to_int(key, value);
    else if (key == "pilot_len") c.pilot_len = to_int(key, value);
    else if (key == "pilot_power_mw") c.pilot_power_mw = to_double(key, value);
    else if (key == "ul_power_mw") c.ul_power_mw = to_double(key, value);
    else if (key == "dl_power_mw") c.dl_power_mw = to_double(key, value);
    else if (key == "carrier_freq_ghz") c.carrier_freq_ghz = to_double(key, value);
    else if (key == "bandwidth_mhz") c.bandwidth_mhz = to_double(key, value);
    else if (key == "noise_figure_db") c.noise_figure_db = to_double(key, value);
    else if (key == "area_side_m") c.area_side_m = to_double(key, value);
    else if (key == "correlation_model") {
        if (value == "local_scattering") c.correlation.kind = CorrelationKind::LocalScattering;
        else if (value == "exponential") c.correlation.kind = CorrelationKind::Exponential;
        else if (value == "identity") c.correlation.kind = CorrelationKind::Identity;
        else throw ConfigError("correlation_model must be local_scattering, exponential or identity");
    }
    else if (key == "angular_spread_deg") c.correlation.angular_spread_deg = to_double(key, value);
    else if (key == "correlation_coefficient") c.correlation.coefficient = to_double(key, value);
    else if (key == "pathloss_model") {
        if (value != "log_distance")
            throw ConfigError("pathloss_model must be log_distance");
    }
    else if (key == "pathloss_ref_db") c.pathloss.ref_db = to_double(key, value);
    else if (key == "pathloss_exponent") c.pathloss.exponent = to_double(key, value);
    else if (key == "pathloss_min_distance_m") c.pathloss.min_distance_m = to_double(key, value);
    else if (key == "pilot_kind") {
        if (value == "random") c.pilot_kind = PilotKind::Random;
        else if (value == "orthogonal") c.pilot_kind = PilotKind::Orthogonal;
        else throw ConfigError("pilot_kind must be random or orthogonal");
    }
    else if (key == "dl_rho") {
        if (value == "auto") c.dl_rho.reset();
        else c.dl_rho = to_double(key, value);
    }
    else if (key == "master_seed") c.master_seed = to_u64(key, value);
    else throw ConfigError("unknown config key '" + key + "'");
}

ScenarioConfig parse_config(const std::string& text)
{
    ScenarioConfig c;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("config line " + std::to_string(lineno) + ": empty key or value");
        apply_config_value(c, key, value);
    }
    c.validate();
    return c;
}

ScenarioConfig load_config(const std::string& path)
{
    std::ifstream f(path);
    if (!f)
        throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

std::string format_config(const ScenarioConfig& c)
{
    char buf[128];
    std::string out;
    auto put = [&](const char* key, const std::string& v) {
        out += key;
        out += " = ";
        out += v;
        out += '\n';
    };
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    put("num_aps", std::to_string(c.num_aps));
    put("antennas_per_ap", std::to_string(c.antennas_per_ap));
    put("rf_chains", std::to_string(c.rf_chains));
    put("num_users", std::to_string(c.num_users));
    put("coherence_len", std::to_string(c.coherence_len));
    put("pilot_len", std::to_string(c.pilot_len));
    put("pilot_power_mw", num(c.pilot_power_mw));
    put("ul_power_mw", num(c.ul_power_mw));
    put("dl_power_mw", num(c.dl_power_mw));
    put("carrier_freq_ghz", num(c.carrier_freq_ghz));
    put("bandwidth_mhz", num(c.bandwidth_mhz));
    put("noise_figure_db", num(c.noise_figure_db));
    put("area_side_m", num(c.area_side_m));
    put("correlation_model", correlation_name(c.correlation.kind));
    put("angular_spread_deg", num(c.correlation.angular_spread_deg));
    put("correlation_coefficient", num(c.correlation.coefficient));
    put("pathloss_model", "log_distance");
    put("pathloss_ref_db", num(c.pathloss.ref_db));
    put("pathloss_exponent", num(c.pathloss.exponent));
    put("pathloss_min_distance_m", num(c.pathloss.min_distance_m));
    put("pilot_kind", c.pilot_kind == PilotKind::Random ? "random" : "orthogonal");
    put("dl_rho", c.dl_rho ? num(*c.dl_rho) : std::string("auto"));
    put("master_seed", std::to_string(c.master_seed));
    return out;
}

std::string config_fingerprint(const ScenarioConfig& c)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : format_config(c)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

} // namespace cfhb
