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

#include "bfmlab/bfm.hpp"

#include <cmath>

#include <Eigen/SVD>

#include "bfmlab/errors.hpp"

namespace bfmlab
{

namespace
{

bool lex_less(const Eigen::VectorXcd &a, const Eigen::VectorXcd &b)
{
    for (Eigen::Index i = 0; i < a.size(); ++i)
    {
        if (a(i).real() != b(i).real())
            return a(i).real() < b(i).real();
        if (a(i).imag() != b(i).imag())
            return a(i).imag() < b(i).imag();
    }
    return false;
}

// Unit-modulus factor that makes the column's anchor entry real and
// non-negative. The anchor is the last entry, or the largest-magnitude
// entry when the last one is numerically zero.
cd column_phase_factor(const Eigen::VectorXcd &col)
{
    Eigen::Index anchor = col.size() - 1;
    if (std::abs(col(anchor)) < 1e-12)
    {
        double best = -1.0;
        for (Eigen::Index i = 0; i < col.size(); ++i)
            if (std::abs(col(i)) > best)
            {
                best = std::abs(col(i));
                anchor = i;
            }
    }
    double mag = std::abs(col(anchor));
    if (mag == 0.0)
        return cd(1.0, 0.0);
    return std::conj(col(anchor)) / mag;
}

Eigen::VectorXcd normalize_column_phase(const Eigen::VectorXcd &col)
{
    return col * column_phase_factor(col);
}

void check_unitary(const Eigen::MatrixXcd &v, double tol)
{
    Eigen::MatrixXcd gram = v.adjoint() * v;
    gram -= Eigen::MatrixXcd::Identity(v.cols(), v.cols());
    if (gram.norm() > tol)
        throw config_error("normalize_phase: input matrix is not unitary");
}

} // namespace

SvdResult svd(const Eigen::MatrixXcd &h)
{
    if (!h.allFinite())
        throw numeric_error("svd: input matrix has non-finite entries");

    Eigen::JacobiSVD<Eigen::MatrixXcd> solver(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
    SvdResult r{solver.matrixU(), solver.singularValues(), solver.matrixV()};

    // Eigen already sorts descending; canonicalize exact ties by the
    // lexicographic order of the phase-normalized V columns.
    const Eigen::Index n = r.sigma.size();
    for (Eigen::Index i = 0; i + 1 < n; ++i)
    {
        if (r.sigma(i) == r.sigma(i + 1))
        {
            Eigen::VectorXcd a = normalize_column_phase(r.v.col(i));
            Eigen::VectorXcd b = normalize_column_phase(r.v.col(i + 1));
            if (lex_less(b, a))
            {
                r.v.col(i).swap(r.v.col(i + 1));
                r.u.col(i).swap(r.u.col(i + 1));
            }
        }
    }
    return r;
}

Eigen::MatrixXcd normalize_phase(const Eigen::MatrixXcd &v)
{
    check_unitary(v, 1e-6);
    Eigen::MatrixXcd out = v;
    for (Eigen::Index c = 0; c < v.cols(); ++c)
        out.col(c) = normalize_column_phase(out.col(c));
    return out;
}

Eigen::MatrixXcd BfmTensor::matrix(int k) const
{
    Eigen::MatrixXcd m(n_tx, n_tx);
    for (int i = 0; i < n_tx; ++i)
        for (int j = 0; j < n_tx; ++j)
            m(i, j) = at(k, i, j);
    return m;
}

BfmTensor compute_bfm(const CsiTensor &csi)
{
    BfmTensor bfm;
    bfm.n_tx = csi.n_tx;
    bfm.subcarrier_indices = csi.subcarrier_indices;
    const int n_sub = csi.n_subcarriers();
    bfm.v.resize(static_cast<size_t>(n_sub) * csi.n_tx * csi.n_tx);

    for (int k = 0; k < n_sub; ++k)
    {
        Eigen::MatrixXcd vk = normalize_phase(svd(csi.matrix(k)).v);
        for (int i = 0; i < csi.n_tx; ++i)
            for (int j = 0; j < csi.n_tx; ++j)
                bfm.v[static_cast<size_t>((k * csi.n_tx + i) * csi.n_tx + j)] = vk(i, j);
    }
    return bfm;
}

Eigen::VectorXcd esdm_shape(const Eigen::MatrixXcd &h, const Eigen::VectorXcd &x,
                            double noise_var, RandomStream &stream)
{
    if (h.cols() != x.size())
        throw config_error("esdm_shape: H has " + std::to_string(h.cols()) +
                           " columns but x has " + std::to_string(x.size()) + " entries");

    SvdResult dec = svd(h);
    // Apply identical unit-modulus column factors to U and V; diag(sigma)
    // commutes with the diagonal factor matrix, so U'^H H V' stays diagonal.
    Eigen::MatrixXcd v = dec.v;
    Eigen::MatrixXcd u = dec.u;
    for (Eigen::Index c = 0; c < v.cols(); ++c)
    {
        cd factor = column_phase_factor(v.col(c));
        v.col(c) *= factor;
        if (c < u.cols())
            u.col(c) *= factor;
    }

    Eigen::VectorXcd y = apply_channel(h, v * x, noise_var, stream);
    return u.adjoint() * y;
}

} // namespace bfmlab
