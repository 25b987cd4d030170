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

#include "cfhb/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "cfhb/errors.hpp"

namespace cfhb {

HermitianEig eig_descending(const CMat& a)
{
    if (a.rows() != a.cols())
        throw DimensionError("eig_descending: matrix is not square");
    const Eigen::Index n = a.rows();
    HermitianEig out;
    if (n == 0)
        return out;
    Eigen::SelfAdjointEigenSolver<CMat> solver(a);
    if (solver.info() != Eigen::Success)
        throw NumericalError("eig_descending: eigen-solver failed");
    out.values.resize(n);
    out.vectors.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        out.values[i] = solver.eigenvalues()[n - 1 - i];
        out.vectors.col(i) = solver.eigenvectors().col(n - 1 - i);
    }
    return out;
}

namespace {

// U diag(f(lambda)) U^H with f(l) = 1/l above the cutoff and 0 below.
CMat spectral_inverse(const HermitianEig& eig, double cutoff)
{
    const Eigen::Index n = eig.values.size();
    RVec inv = RVec::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i)
        if (eig.values[i] > cutoff)
            inv[i] = 1.0 / eig.values[i];
    return eig.vectors * inv.asDiagonal() * eig.vectors.adjoint();
}

bool well_conditioned(const RVec& values)
{
    if (values.size() == 0)
        return true;
    const double lmax = values.cwiseAbs().maxCoeff();
    const double lmin = values.minCoeff();
    return lmin > 0.0 && lmax <= kPinvConditionLimit * lmin;
}

} // namespace

CMat hermitian_inverse(const CMat& a, bool* used_pinv)
{
    const HermitianEig eig = eig_descending(a);
    const bool regular = well_conditioned(eig.values);
    if (used_pinv)
        *used_pinv = !regular;
    if (eig.values.size() == 0)
        return CMat(0, 0);
    const double lmax = eig.values.cwiseAbs().maxCoeff();
    if (lmax == 0.0)
        return CMat::Zero(a.rows(), a.cols());
    return spectral_inverse(eig, regular ? 0.0 : kPinvCutoff * lmax);
}

CMat hermitian_solve(const CMat& a, const CMat& b)
{
    if (a.rows() != b.rows())
        throw DimensionError("hermitian_solve: row mismatch");
    return hermitian_inverse(a) * b;
}

CMat hermitian_sqrt(const CMat& a)
{
    const HermitianEig eig = eig_descending(hermitian_part(a));
    const RVec root = eig.values.cwiseMax(0.0).cwiseSqrt();
    return eig.vectors * root.asDiagonal() * eig.vectors.adjoint();
}

CMat hermitian_part(const CMat& a)
{
    CMat out = a.adjoint();
    out += a;
    out *= 0.5;
    return out;
}

double hermitian_defect(const CMat& a)
{
    if (a.size() == 0)
        return 0.0;
    return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

double relative_min_eigenvalue(const CMat& a)
{
    const HermitianEig eig = eig_descending(hermitian_part(a));
    if (eig.values.size() == 0)
        return 0.0;
    const double lmax = eig.values.cwiseAbs().maxCoeff();
    if (lmax == 0.0)
        return 0.0;
    return eig.values.minCoeff() / lmax;
}

// ---------------------------------------------------------------------------
// BlockDiag

BlockDiag::BlockDiag(std::vector<CMat> blocks) : blocks_(std::move(blocks))
{
    for (const CMat& b : blocks_)
        if (b.rows() != b.cols() || b.rows() != blocks_.front().rows())
            throw DimensionError("BlockDiag: blocks must be square and of equal size");
}

BlockDiag BlockDiag::zeros(std::size_t num_blocks, Eigen::Index block_size)
{
    return BlockDiag(std::vector<CMat>(num_blocks, CMat::Zero(block_size, block_size)));
}

BlockDiag BlockDiag::identity(std::size_t num_blocks, Eigen::Index block_size)
{
    return BlockDiag(std::vector<CMat>(num_blocks, CMat::Identity(block_size, block_size)));
}

Eigen::Index BlockDiag::dim() const noexcept
{
    return static_cast<Eigen::Index>(blocks_.size()) * block_size();
}

CMat BlockDiag::dense() const
{
    const Eigen::Index b = block_size();
    CMat out = CMat::Zero(dim(), dim());
    for (std::size_t m = 0; m < blocks_.size(); ++m)
        out.block(static_cast<Eigen::Index>(m) * b, static_cast<Eigen::Index>(m) * b, b, b) = blocks_[m];
    return out;
}

cplx BlockDiag::trace() const
{
    cplx t = 0.0;
    for (const CMat& b : blocks_)
        t += b.trace();
    return t;
}

bool BlockDiag::conforms(const BlockDiag& other) const noexcept
{
    return num_blocks() == other.num_blocks() && block_size() == other.block_size();
}

BlockDiag& BlockDiag::operator+=(const BlockDiag& other)
{
    if (!conforms(other))
        throw DimensionError("BlockDiag: shape mismatch in +=");
    for (std::size_t m = 0; m < blocks_.size(); ++m)
        blocks_[m] += other.blocks_[m];
    return *this;
}

BlockDiag& BlockDiag::operator-=(const BlockDiag& other)
{
    if (!conforms(other))
        throw DimensionError("BlockDiag: shape mismatch in -=");
    for (std::size_t m = 0; m < blocks_.size(); ++m)
        blocks_[m] -= other.blocks_[m];
    return *this;
}

BlockDiag& BlockDiag::operator*=(double s)
{
    for (CMat& b : blocks_)
        b *= s;
    return *this;
}

BlockDiag BlockDiag::adjoint() const
{
    BlockDiag out = *this;
    for (CMat& b : out.blocks_)
        b.adjointInPlace();
    return out;
}

BlockDiag BlockDiag::inverse() const
{
    BlockDiag out = *this;
    for (CMat& b : out.blocks_)
        b = hermitian_inverse(b);
    return out;
}

CVec BlockDiag::apply(const CVec& x) const
{
    if (x.size() != dim())
        throw DimensionError("BlockDiag::apply: vector length mismatch");
    const Eigen::Index b = block_size();
    CVec y(x.size());
    for (std::size_t m = 0; m < blocks_.size(); ++m)
        y.segment(static_cast<Eigen::Index>(m) * b, b) = blocks_[m] * x.segment(static_cast<Eigen::Index>(m) * b, b);
    return y;
}

Eigen::VectorBlock<const CVec> BlockDiag::slice(const CVec& x, std::size_t m) const
{
    const Eigen::Index b = block_size();
    return x.segment(static_cast<Eigen::Index>(m) * b, b);
}

BlockDiag operator+(BlockDiag a, const BlockDiag& b) { return a += b; }
BlockDiag operator-(BlockDiag a, const BlockDiag& b) { return a -= b; }
BlockDiag operator*(double s, BlockDiag a) { return a *= s; }

BlockDiag operator*(const BlockDiag& a, const BlockDiag& b)
{
    if (!a.conforms(b))
        throw DimensionError("BlockDiag: shape mismatch in product");
    std::vector<CMat> blocks(a.num_blocks());
    for (std::size_t m = 0; m < blocks.size(); ++m)
        blocks[m] = a.block(m) * b.block(m);
    return BlockDiag(std::move(blocks));
}

cplx trace_product(const BlockDiag& a, const BlockDiag& b)
{
    if (!a.conforms(b))
        throw DimensionError("trace_product: shape mismatch");
    cplx t = 0.0;
    for (std::size_t m = 0; m < a.num_blocks(); ++m)
        t += (a.block(m).transpose().cwiseProduct(b.block(m))).sum();
    return t;
}

cplx trace_product(const BlockDiag& a, const BlockDiag& b, const BlockDiag& c, const BlockDiag& d)
{
    if (!a.conforms(b) || !a.conforms(c) || !a.conforms(d))
        throw DimensionError("trace_product: shape mismatch");
    cplx t = 0.0;
    for (std::size_t m = 0; m < a.num_blocks(); ++m) {
        const CMat ab = a.block(m) * b.block(m);
        const CMat cd = c.block(m) * d.block(m);
        t += (ab.transpose().cwiseProduct(cd)).sum();
    }
    return t;
}

} // namespace cfhb
