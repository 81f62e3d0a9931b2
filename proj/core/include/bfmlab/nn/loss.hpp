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

#ifndef BFMLAB_NN_LOSS_HPP
#define BFMLAB_NN_LOSS_HPP

#include <cstdint>
#include <vector>

#include "bfmlab/errors.hpp"
#include "bfmlab/tensor.hpp"

namespace bfmlab
{

template <typename T>
struct LossResult
{
    T value = T(0);
    Tensor<T> grad; // d value / d predicted
};

/// Mean squared error over the entries of unmasked frequency bins only;
/// `mask` is indexed by the frequency axis (dim 1). Masked bins contribute
/// nothing to the value or the gradient. Throws config_error on shape
/// mismatch or when every bin is masked.
template <typename T>
LossResult<T> masked_mse(const Tensor<T> &predicted, const Tensor<T> &label,
                         const std::vector<uint8_t> &mask)
{
    if (!predicted.same_shape(label))
        throw config_error("masked_mse: predicted and label shapes differ");
    if (predicted.rank() != 4 || static_cast<size_t>(predicted.dim(1)) != mask.size())
        throw config_error("masked_mse: mask length does not match the frequency axis");

    int64_t valid_bins = 0;
    for (uint8_t m : mask)
        valid_bins += m ? 1 : 0;
    if (valid_bins == 0)
        throw config_error("masked_mse: every frequency bin is masked");

    const int batch = predicted.dim(0);
    const int f = predicted.dim(1);
    const int plane = predicted.dim(2) * predicted.dim(3);
    const int64_t count = static_cast<int64_t>(batch) * valid_bins * plane;

    LossResult<T> r;
    r.grad = Tensor<T>(predicted.shape());
    long double acc = 0.0L;
    const T gscale = T(2) / static_cast<T>(count);
    for (int b = 0; b < batch; ++b)
        for (int k = 0; k < f; ++k)
        {
            if (!mask[static_cast<size_t>(k)])
                continue;
            const int64_t base = (static_cast<int64_t>(b) * f + k) * plane;
            for (int i = 0; i < plane; ++i)
            {
                const T d = predicted[base + i] - label[base + i];
                acc += static_cast<long double>(d) * static_cast<long double>(d);
                r.grad[base + i] = gscale * d;
            }
        }
    r.value = static_cast<T>(acc / static_cast<long double>(count));
    return r;
}

} // namespace bfmlab

#endif
