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
#include <span>
#include <vector>

#include "cfhb/linalg.hpp"

namespace cfhb {

struct FixedPointOptions {
    double tolerance = 1e-8;  // on max_k |delta e_k| / (1 + e_k)
    int max_iterations = 1000;
    /// Newton steps on e - f(e) = 0 (same fixed point, quadratic
    /// convergence); false gives the plain iteration e <- f(e).
    bool newton = true;
};

/// Solution of e_k = (w_k/n) tr(C_k T),
/// T = ((1/n) sum_k w_k C_k / (1 + e_k) + S0/n + (z/n) I)^-1.
struct FixedPointSolution {
    std::vector<double> e;
    BlockDiag T;
    int iterations = 0;
    double residual = 0.0; // residual of the returned e
    bool damped = false;   // plain steps switched to half-step averaging
};

/// Iterates from e_k = 1. Inverses are blockwise. A Newton step (halved up
/// to three times) is taken when it lowers the residual, otherwise the plain
/// update; plain steps become half-step averages e <- (e + f(e))/2 once the
/// residual has increased twice. Once the tolerance is met one more
/// improving step is taken.
/// Throws NumericalError (carrying the last residual) when max_iterations is
/// exhausted.
FixedPointSolution solve_fixed_point(std::span<const double> weights, const std::vector<BlockDiag>& C,
                                     const BlockDiag& S0, double z, double n, const FixedPointOptions& options = {});

/// Derivative equivalent along the Hermitian direction Theta:
/// T' = T Theta T + T ((1/n) sum_k w_k C_k e'_k / (1 + e_k)^2) T,
/// e' = (I - J)^-1 v.
struct DerivativeEquivalent {
    BlockDiag Tprime;
    std::vector<double> eprime;
    RMat J;
    RVec v;
    double spectral_radius = 0.0;
};

/// Throws NumericalError when the spectral radius of J is >= 1.
DerivativeEquivalent solve_derivative(const FixedPointSolution& solution, const BlockDiag& theta,
                                      std::span<const double> weights, const std::vector<BlockDiag>& C, double n);

/// Both sides of x^H (U + c x x^H)^-1 = x^H U^-1 / (1 + c x^H U^-1 x), as
/// row vectors stored in column form.
struct RankOneSides {
    CVec lhs;
    CVec rhs;
};

/// Throws NumericalError if U or U + c x x^H is singular.
RankOneSides rank_one_update_identity(const CMat& U, const CVec& x, double c);

/// Deviations of x^H A x from tr(A)/n and of x^H A y from 0, with x, y
/// i.i.d. CN(0, I/n), over `trials` draws.
struct TraceLemmaStats {
    int n = 0;
    int trials = 0;
    double median_quadratic = 0.0;
    double max_quadratic = 0.0;
    double median_cross = 0.0;
    double max_cross = 0.0;
};

TraceLemmaStats trace_lemma_oracle(const CMat& A, int trials, std::uint64_t seed);

/// |(1/n) tr(A B^-1) - (1/n) tr(A (B + v v^H)^-1)|.
double trace_perturbation(const CMat& A, const CMat& B, const CVec& v);

} // namespace cfhb
