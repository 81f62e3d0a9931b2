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

#ifndef BFMLAB_TENSOR_HPP
#define BFMLAB_TENSOR_HPP

#include <cstdint>
#include <numeric>
#include <vector>

namespace bfmlab
{

/// Dense row-major tensor. The last axis is contiguous; network activations
/// use the (batch, frequency, antenna, channel) convention throughout.
template <typename T>
class Tensor
{
public:
    Tensor() = default;

    explicit Tensor(std::vector<int> shape) : shape_(std::move(shape))
    {
        data_.assign(static_cast<size_t>(count(shape_)), T(0));
    }

    static int64_t count(const std::vector<int> &shape)
    {
        int64_t n = 1;
        for (int d : shape)
            n *= d;
        return n;
    }

    const std::vector<int> &shape() const { return shape_; }
    int rank() const { return static_cast<int>(shape_.size()); }
    int dim(int i) const { return shape_[static_cast<size_t>(i)]; }
    int64_t size() const { return static_cast<int64_t>(data_.size()); }
    bool empty() const { return data_.empty(); }

    T *data() { return data_.data(); }
    const T *data() const { return data_.data(); }

    // Underlying storage, for serialization and bulk copies.
    std::vector<T> &vec() { return data_; }
    const std::vector<T> &vec() const { return data_; }

    T &operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
    const T &operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }

    // 3-d accessor for (f, a, c) layouts.
    T &at3(int f, int a, int c)
    {
        return data_[static_cast<size_t>((static_cast<int64_t>(f) * shape_[1] + a) * shape_[2] + c)];
    }
    const T &at3(int f, int a, int c) const
    {
        return data_[static_cast<size_t>((static_cast<int64_t>(f) * shape_[1] + a) * shape_[2] + c)];
    }

    // 4-d accessor for (b, f, a, c) layouts.
    T &at4(int b, int f, int a, int c)
    {
        return data_[static_cast<size_t>(((static_cast<int64_t>(b) * shape_[1] + f) * shape_[2] + a) * shape_[3] + c)];
    }
    const T &at4(int b, int f, int a, int c) const
    {
        return data_[static_cast<size_t>(((static_cast<int64_t>(b) * shape_[1] + f) * shape_[2] + a) * shape_[3] + c)];
    }

    void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

    bool same_shape(const Tensor &other) const { return shape_ == other.shape_; }

private:
    std::vector<int> shape_;
    std::vector<T> data_;
};

} // namespace bfmlab

#endif
