// SPDX-License-Identifier: Apache-2.0
//
// bfmlab - channel state recomposition from beamforming feedback
// Copyright (C) 2026 the bfmlab authors
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

#ifndef BFMLAB_BFM_HPP
#define BFMLAB_BFM_HPP

#include <Eigen/Dense>

#include "bfmlab/channel.hpp"

namespace bfmlab
{

/// H = U * diag(sigma) * V^H with sigma sorted descending. Exactly equal
/// singular values are ordered by a lexicographic comparison of the
/// phase-normalized V columns so the decomposition is deterministic.
struct SvdResult
{
    Eigen::MatrixXcd u;
    Eigen::VectorXd sigma;
    Eigen::MatrixXcd v;
};

SvdResult svd(const Eigen::MatrixXcd &h);

/// Rescales each column by a unit-modulus factor so its anchor entry is real
/// and nonnegative. The anchor is the last-row entry, falling back to the
/// column's largest-magnitude entry when the last row is (numerically) zero.
/// Mirrors the feedback convention that makes the reported matrix's last row
/// real. Idempotent; throws config_error for non-unitary input.
Eigen::MatrixXcd normalize_phase(const Eigen::MatrixXcd &v);

/// Phase-normalized right-singular matrices for every subcarrier.
struct BfmTensor
{
    int n_tx = 0;
    std::vector<int> subcarrier_indices;
    std::vector<cd> v; // (subcarrier, row, col) row-major

    int n_subcarriers() const { return static_cast<int>(subcarrier_indices.size()); }
    cd at(int k, int row, int col) const
    {
        return v[static_cast<size_t>((k * n_tx + row) * n_tx + col)];
    }
    Eigen::MatrixXcd matrix(int k) const;
};

BfmTensor compute_bfm(const CsiTensor &csi);

/// Eigenbeam-shaped transmission: r = U^H (H V x + z). The same unit-modulus
/// column factors are applied to U and V, so with zero noise r equals
/// diag(sigma) * x.
Eigen::VectorXcd esdm_shape(const Eigen::MatrixXcd &h, const Eigen::VectorXcd &x,
                            double noise_var, RandomStream &stream);

} // namespace bfmlab

#endif
