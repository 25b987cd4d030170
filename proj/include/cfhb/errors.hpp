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

#include <limits>
#include <stdexcept>
#include <string>

namespace cfhb {

/// Invalid or inconsistent configuration (bad keys, violated invariants).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shapes of the operands do not conform.
class DimensionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical procedure failed (non-convergence, singular system,
/// indefinite covariance). `residual` carries the last measured residual
/// when one exists, NaN otherwise.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what, double residual = std::numeric_limits<double>::quiet_NaN())
        : std::runtime_error(what), residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

} // namespace cfhb
