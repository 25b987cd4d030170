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

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cfhb/scenario.hpp"

namespace cfhb {

enum class Method { ExactMC, Approx1, Approx2, DlExactMC, DlApprox };

/// "exact_mc", "approx1", "approx2", "dl_exact_mc", "dl_approx".
const char* method_name(Method method) noexcept;
std::optional<Method> parse_method(std::string_view name);

/// prefactor * log2(1 + max(sinr, 0)). Negative SINRs (possible for the
/// first uplink approximation) are clamped here and nowhere else.
double spectral_efficiency(double sinr, double prefactor) noexcept;
std::vector<double> spectral_efficiency(std::span<const double> sinr, double prefactor);

struct SinrReport {
    Method method = Method::ExactMC;
    std::vector<double> sinr;
    std::vector<double> se;
    std::string config_fingerprint;
    std::uint64_t seed = 0;
    int trials = 0;
};

SinrReport make_report(Method method, std::vector<double> sinr, const ScenarioConfig& config, std::uint64_t seed,
                       int trials);

} // namespace cfhb
