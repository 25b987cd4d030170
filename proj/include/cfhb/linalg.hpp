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

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace cfhb {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

/// Condition number above which inverses of Hermitian matrices switch to the
/// truncated pseudo-inverse.
inline constexpr double kPinvConditionLimit = 1e10;
/// Relative eigen/singular value cutoff used by the truncated pseudo-inverse.
inline constexpr double kPinvCutoff = 1e-12;

/// Eigen-decomposition of a Hermitian matrix with eigenvalues sorted in
/// descending order (column i of `vectors` belongs to `values[i]`).
struct HermitianEig {
    RVec values;
    CMat vectors;
};

HermitianEig eig_descending(const CMat& a);

/// Inverse of a Hermitian positive semi-definite matrix. When the condition
/// number exceeds kPinvConditionLimit (or the matrix is singular) the
/// Moore-Penrose pseudo-inverse with cutoff kPinvCutoff * lambda_max is used
/// instead; `used_pinv` reports which branch ran.
CMat hermitian_inverse(const CMat& a, bool* used_pinv = nullptr);

/// Solves A x = b for Hermitian PSD A under the same conditioning rule as
/// hermitian_inverse.
CMat hermitian_solve(const CMat& a, const CMat& b);

/// PSD square root of a Hermitian matrix; negative eigenvalues are clipped
/// to zero.
CMat hermitian_sqrt(const CMat& a);

/// (A + A^H) / 2, evaluated into a fresh matrix.
CMat hermitian_part(const CMat& a);

/// Max-abs deviation from Hermitian symmetry.
double hermitian_defect(const CMat& a);

/// Smallest eigenvalue divided by the largest absolute eigenvalue; negative
/// values indicate indefiniteness. Returns 0 for the zero matrix.
double relative_min_eigenvalue(const CMat& a);

/// Block-diagonal complex matrix stored as its diagonal blocks. Every
/// statistic in this library that lives on the stacked M*N_RF CPU dimension
/// is block-diagonal with one N_RF x N_RF block per AP.
class BlockDiag {
public:
    BlockDiag() = default;
    explicit BlockDiag(std::vector<CMat> blocks);

    static BlockDiag zeros(std::size_t num_blocks, Eigen::Index block_size);
    static BlockDiag identity(std::size_t num_blocks, Eigen::Index block_size);

    std::size_t num_blocks() const noexcept { return blocks_.size(); }
    Eigen::Index block_size() const noexcept { return blocks_.empty() ? 0 : blocks_.front().rows(); }
    Eigen::Index dim() const noexcept;

    const CMat& block(std::size_t m) const { return blocks_.at(m); }
    CMat& block(std::size_t m) { return blocks_.at(m); }
    const std::vector<CMat>& blocks() const noexcept { return blocks_; }

    CMat dense() const;
    cplx trace() const;

    BlockDiag& operator+=(const BlockDiag& other);
    BlockDiag& operator-=(const BlockDiag& other);
    BlockDiag& operator*=(double s);
    BlockDiag adjoint() const;

    /// Blockwise hermitian_inverse.
    BlockDiag inverse() const;

    /// y = A x on the stacked dimension.
    CVec apply(const CVec& x) const;

    /// Slice of a stacked vector belonging to block m.
    Eigen::VectorBlock<const CVec> slice(const CVec& x, std::size_t m) const;

    bool conforms(const BlockDiag& other) const noexcept;

private:
    std::vector<CMat> blocks_;
};

BlockDiag operator+(BlockDiag a, const BlockDiag& b);
BlockDiag operator-(BlockDiag a, const BlockDiag& b);
BlockDiag operator*(double s, BlockDiag a);
BlockDiag operator*(const BlockDiag& a, const BlockDiag& b);

/// tr(A B) computed blockwise.
cplx trace_product(const BlockDiag& a, const BlockDiag& b);
/// tr(A B C D) computed blockwise.
cplx trace_product(const BlockDiag& a, const BlockDiag& b, const BlockDiag& c, const BlockDiag& d);

} // namespace cfhb
