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

#include <vector>

#include <doctest.h>

#include "bfmlab/errors.hpp"
#include "bfmlab/nn/loss.hpp"
#include "bfmlab/rng.hpp"

#include "testutil.hpp"

using namespace bfmlab;

TEST_CASE("masked_mse is zero at the label and one at unit offset")
{
    Tensor<double> label({2, 4, 3, 1});
    RandomStream s(31, stream_id(StreamPurpose::noise, 31));
    testutil::fill_gaussian(label, s);
    const std::vector<uint8_t> mask{1, 1, 1, 1};

    const auto exact = masked_mse(label, label, mask);
    CHECK_EQ(exact.value, 0.0);
    for (int64_t i = 0; i < exact.grad.size(); ++i)
        CHECK_EQ(exact.grad[i], 0.0);

    Tensor<double> shifted = label;
    for (int64_t i = 0; i < shifted.size(); ++i)
        shifted[i] += 1.0;
    const auto unit = masked_mse(shifted, label, mask);
    CHECK_EQ(unit.value, doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("masked bins contribute neither value nor gradient")
{
    Tensor<double> pred({1, 4, 2, 1});
    Tensor<double> label({1, 4, 2, 1});
    pred.fill(0.0);
    label.fill(0.0);
    const std::vector<uint8_t> mask{1, 1, 0, 0};

    // A huge error in a masked bin is invisible.
    pred.at4(0, 2, 0, 0) = 1e9;
    auto r = masked_mse(pred, label, mask);
    CHECK_EQ(r.value, 0.0);
    CHECK_EQ(r.grad.at4(0, 2, 0, 0), 0.0);

    // The same error in a valid bin is not: mean over 1*2*2 = 4 entries.
    pred.at4(0, 2, 0, 0) = 0.0;
    pred.at4(0, 1, 0, 0) = 2.0;
    r = masked_mse(pred, label, mask);
    CHECK_EQ(r.value, doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("masked_mse gradient is 2(p - l)/count on valid bins")
{
    Tensor<double> pred({2, 3, 2, 2});
    Tensor<double> label({2, 3, 2, 2});
    RandomStream s(32, stream_id(StreamPurpose::noise, 32));
    testutil::fill_gaussian(pred, s);
    testutil::fill_gaussian(label, s);
    const std::vector<uint8_t> mask{1, 0, 1};

    const auto r = masked_mse(pred, label, mask);
    const int64_t count = 2 * 2 * 2 * 2; // batch * valid bins * plane
    for (int b = 0; b < 2; ++b)
        for (int k = 0; k < 3; ++k)
            for (int a = 0; a < 2; ++a)
                for (int c = 0; c < 2; ++c)
                {
                    const double expected =
                        mask[static_cast<size_t>(k)]
                            ? 2.0 * (pred.at4(b, k, a, c) - label.at4(b, k, a, c)) /
                                  static_cast<double>(count)
                            : 0.0;
                    CHECK_EQ(r.grad.at4(b, k, a, c), doctest::Approx(expected).epsilon(1e-12));
                }

    // The analytic gradient agrees with central differences.
    const double worst = testutil::fd_check(
        pred, r.grad.vec(), [&]() { return masked_mse(pred, label, mask).value; }, 1e-6, 1e-8,
        1e-6);
    CHECK_LT(worst, 1e-6);
}

TEST_CASE("masked_mse validates shapes and the mask")
{
    Tensor<double> a({1, 4, 2, 1});
    Tensor<double> b({1, 4, 2, 2});
    CHECK_THROWS_AS(masked_mse(a, b, std::vector<uint8_t>{1, 1, 1, 1}), config_error);
    CHECK_THROWS_AS(masked_mse(a, a, std::vector<uint8_t>{1, 1}), config_error);
    CHECK_THROWS_WITH_AS(masked_mse(a, a, std::vector<uint8_t>{0, 0, 0, 0}),
                         doctest::Contains("masked"), config_error);
}
