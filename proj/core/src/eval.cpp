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

#include "bfmlab/eval.hpp"

#include <algorithm>

namespace bfmlab
{

std::vector<EcdfPoint> ecdf(std::vector<double> errors)
{
    if (errors.empty())
        throw config_error("ecdf: input is empty");
    std::sort(errors.begin(), errors.end());
    const double n = static_cast<double>(errors.size());
    std::vector<EcdfPoint> points;
    size_t i = 0;
    while (i < errors.size())
    {
        size_t j = i;
        while (j < errors.size() && errors[j] == errors[i])
            ++j;
        points.push_back({errors[i], static_cast<double>(j) / n});
        i = j;
    }
    return points;
}

double quantile(std::vector<double> values, double q)
{
    if (values.empty())
        throw config_error("quantile: input is empty");
    if (!(q > 0.0) || q > 1.0)
        throw config_error("quantile: q must lie in (0, 1]");
    std::sort(values.begin(), values.end());
    const auto n = static_cast<double>(values.size());
    auto rank = static_cast<size_t>(std::ceil(q * n));
    if (rank < 1)
        rank = 1;
    return values[rank - 1];
}

} // namespace bfmlab
