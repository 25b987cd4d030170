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

#include "cfhb/rates.hpp"

#include <algorithm>
#include <cmath>

namespace cfhb {

const char* method_name(Method method) noexcept
{
    switch (method) {
    case Method::ExactMC: return "exact_mc";
    case Method::Approx1: return "approx1";
    case Method::Approx2: return "approx2";
    case Method::DlExactMC: return "dl_exact_mc";
    case Method::DlApprox: return "dl_approx";
    }
    return "unknown";
}

std::optional<Method> parse_method(std::string_view name)
{
    for (Method m : {Method::ExactMC, Method::Approx1, Method::Approx2, Method::DlExactMC, Method::DlApprox})
        if (name == method_name(m))
            return m;
    return std::nullopt;
}

double spectral_efficiency(double sinr, double prefactor) noexcept
{
    return prefactor * std::log2(1.0 + std::max(sinr, 0.0));
}

std::vector<double> spectral_efficiency(std::span<const double> sinr, double prefactor)
{
    std::vector<double> out(sinr.size());
    for (std::size_t i = 0; i < sinr.size(); ++i)
        out[i] = spectral_efficiency(sinr[i], prefactor);
    return out;
}

SinrReport make_report(Method method, std::vector<double> sinr, const ScenarioConfig& config, std::uint64_t seed,
                       int trials)
{
    SinrReport r;
    r.method = method;
    r.se = spectral_efficiency(sinr, config.se_prefactor());
    r.sinr = std::move(sinr);
    r.config_fingerprint = config_fingerprint(config);
    r.seed = seed;
    r.trials = trials;
    return r;
}

} // namespace cfhb
