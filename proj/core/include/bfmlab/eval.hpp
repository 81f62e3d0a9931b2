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

#ifndef BFMLAB_EVAL_HPP
#define BFMLAB_EVAL_HPP

#include <cmath>
#include <string>
#include <vector>

#include "bfmlab/dataset.hpp"
#include "bfmlab/errors.hpp"
#include "bfmlab/trainer.hpp"

namespace bfmlab
{

struct EcdfPoint
{
    double value = 0.0;
    double fraction = 0.0;
};

struct EvalReport
{
    std::string variant;
    int group_size = 0;
    std::string dataset_hash;
    std::vector<double> errors; // per-sample Frobenius errors
    double mean_error = 0.0;
    std::vector<EcdfPoint> ecdf_points;
};

/// Right-continuous empirical CDF evaluated at the sorted unique values.
std::vector<EcdfPoint> ecdf(std::vector<double> errors);

/// Order statistic at rank ceil(q*n) of the sorted values, q in (0, 1].
double quantile(std::vector<double> values, double q);

/// Mean over the leading axis of the Frobenius norm of the difference:
/// (1/K) * sum_k ||pred[k] - label[k]||_F. Inputs are de-normalized
/// amplitudes with the subcarrier axis first.
template <typename T>
double frobenius_error(const Tensor<T> &predicted, const Tensor<T> &label)
{
    if (predicted.shape() != label.shape())
        throw config_error("frobenius_error: shape mismatch");
    if (predicted.rank() < 1 || predicted.dim(0) < 1)
        throw config_error("frobenius_error: need at least one subcarrier");
    const int64_t k = predicted.dim(0);
    const int64_t plane = predicted.size() / k;
    long double acc = 0.0L;
    for (int64_t s = 0; s < k; ++s)
    {
        long double sq = 0.0L;
        for (int64_t i = 0; i < plane; ++i)
        {
            const long double d = static_cast<long double>(predicted[s * plane + i]) -
                                  static_cast<long double>(label[s * plane + i]);
            sq += d * d;
        }
        acc += std::sqrt(static_cast<double>(sq));
    }
    return static_cast<double>(acc / static_cast<long double>(k));
}

/// Per-sample Frobenius errors on one dataset split, inference mode, with
/// predictions and labels de-normalized by the dataset scale.
template <typename T>
EvalReport evaluate(Network<T> &net, const Dataset &data, Split split, int batch_size = 64)
{
    const IndexRange range = data.sample_range(split);
    if (range.count() <= 0)
        throw config_error("evaluate: requested split is empty");
    if (batch_size < 1)
        throw config_error("evaluate: batch_size must be at least 1");

    const int g = data.manifest.group_size;
    const int a = data.manifest.n_rx * data.manifest.n_tx;
    const int f = data.manifest.f_pad;
    const double scale = data.manifest.scale;

    EvalReport rep;
    rep.variant = net.spec().variant;
    rep.group_size = g;
    rep.dataset_hash = data.manifest.sim_config_hash_hex;
    rep.errors.reserve(static_cast<size_t>(range.count()));

    std::vector<int64_t> order;
    for (int64_t s = range.begin; s < range.end; ++s)
        order.push_back(s);

    Tensor<T> x, y;
    for (size_t first = 0; first < order.size(); first += static_cast<size_t>(batch_size))
    {
        const int count = static_cast<int>(
            std::min<size_t>(static_cast<size_t>(batch_size), order.size() - first));
        detail::fill_batch(data, order, first, count, x, y);
        const Tensor<T> &pred = net.forward(x, Mode::infer);

        const int64_t plane = static_cast<int64_t>(f) * a;
        for (int b = 0; b < count; ++b)
        {
            long double acc = 0.0L;
            for (int k = 0; k < g; ++k)
            {
                long double sq = 0.0L;
                for (int ai = 0; ai < a; ++ai)
                {
                    const int64_t at = b * plane + static_cast<int64_t>(k) * a + ai;
                    const long double d =
                        (static_cast<long double>(pred[at]) - static_cast<long double>(y[at])) *
                        scale;
                    sq += d * d;
                }
                acc += std::sqrt(static_cast<double>(sq));
            }
            rep.errors.push_back(static_cast<double>(acc / g));
        }
    }

    long double sum = 0.0L;
    for (double e : rep.errors)
        sum += e;
    rep.mean_error = static_cast<double>(sum / static_cast<long double>(rep.errors.size()));
    rep.ecdf_points = ecdf(rep.errors);
    return rep;
}

/// Ground-truth vs predicted amplitude of one antenna pair across the full
/// occupied grid, stitched over all groups of one realization of a split.
struct AmplitudeTrace
{
    std::vector<int> subcarriers;
    std::vector<double> truth;
    std::vector<double> predicted;
};

template <typename T>
AmplitudeTrace amplitude_trace(Network<T> &net, const Dataset &data, Split split,
                               int64_t realization_ordinal, int rx, int tx)
{
    const IndexRange range = data.sample_range(split);
    const int gpr = data.manifest.groups_per_realization;
    const int g = data.manifest.group_size;
    const int a = data.manifest.n_rx * data.manifest.n_tx;
    const int f = data.manifest.f_pad;
    const int64_t first = range.begin + realization_ordinal * gpr;
    if (realization_ordinal < 0 || first + gpr > range.end)
        throw config_error("amplitude_trace: realization ordinal out of range");
    if (rx < 0 || rx >= data.manifest.n_rx || tx < 0 || tx >= data.manifest.n_tx)
        throw config_error("amplitude_trace: antenna index out of range");

    std::vector<int64_t> order;
    for (int64_t s = first; s < first + gpr; ++s)
        order.push_back(s);

    AmplitudeTrace trace;
    Tensor<T> x, y;
    detail::fill_batch(data, order, 0, gpr, x, y);
    const Tensor<T> &pred = net.forward(x, Mode::infer);
    const int64_t plane = static_cast<int64_t>(f) * a;
    const int ai = rx * data.manifest.n_tx + tx;
    const double scale = data.manifest.scale;
    for (int j = 0; j < gpr; ++j)
    {
        for (int k = 0; k < g; ++k)
        {
            const int64_t at = static_cast<int64_t>(j) * plane + static_cast<int64_t>(k) * a + ai;
            trace.subcarriers.push_back(data.manifest.subcarrier_indices[j * g + k]);
            trace.truth.push_back(static_cast<double>(y[at]) * scale);
            trace.predicted.push_back(static_cast<double>(pred[at]) * scale);
        }
    }
    return trace;
}

// ---------------------------------------------------------------------------
// Orchestration: the three-way estimation comparison and the per-group-size
// sweep. Both train from scratch on datasets generated from one simulation
// config, so every row sees the same underlying channel realizations.
// ---------------------------------------------------------------------------

struct ComparisonRow
{
    std::string label;   // human-readable configuration name
    std::string variant; // model variant
    int group_size = 0;
    double mean_error = 0.0;
    double reference = 0.0; // published value, metadata for the report footer
};

struct ComparisonTable
{
    std::vector<ComparisonRow> rows;
};

struct SweepRow
{
    int group_size = 0;
    double mean_error = 0.0;
};

template <typename T>
ComparisonTable run_comparison(const SimConfig &sim, const ChannelProfile &profile,
                               const TrainConfig &tc, int base_channels)
{
    const int k = static_cast<int>(sim.occupied_subcarriers.size());
    const Dataset integrated = generate_dataset(sim, profile, k);
    const Dataset individual = generate_dataset(sim, profile, 1);
    const int a = sim.n_rx * sim.n_tx;

    struct Config
    {
        const char *label;
        const char *variant;
        const Dataset *data;
        double reference;
    };
    const Config configs[] = {
        {"subcarrier-integrated (cnn+convlstm)", "cnn_convlstm", &integrated, 0.434},
        {"subcarrier-integrated (cnn)", "cnn", &integrated, 0.448},
        {"subcarrier-individual (cnn)", "cnn", &individual, 0.539},
    };

    ComparisonTable table;
    for (const Config &c : configs)
    {
        const ModelSpec spec = make_model_spec(c.variant, c.data->manifest.f_pad,
                                               c.data->manifest.group_size, a, base_channels);
        Network<T> net(spec);
        train(net, *c.data, tc);
        const EvalReport rep = evaluate(net, *c.data, Split::test, tc.batch_size);
        table.rows.push_back({c.label, c.variant, c.data->manifest.group_size, rep.mean_error,
                              c.reference});
    }
    return table;
}

template <typename T>
std::vector<SweepRow> subcarrier_sweep(const SimConfig &sim, const ChannelProfile &profile,
                                       const TrainConfig &tc, int base_channels,
                                       std::vector<int> group_sizes)
{
    const int k = static_cast<int>(sim.occupied_subcarriers.size());
    if (group_sizes.empty())
        group_sizes = {1, 2, 11, 22, 121, 242};
    for (int g : group_sizes)
        if (g < 1 || k % g != 0)
            throw config_error("subcarrier_sweep: group size " + std::to_string(g) +
                               " does not divide the grid of " + std::to_string(k));

    const int a = sim.n_rx * sim.n_tx;
    std::vector<SweepRow> rows;
    for (int g : group_sizes)
    {
        const Dataset data = generate_dataset(sim, profile, g);
        const ModelSpec spec =
            make_model_spec("cnn", data.manifest.f_pad, g, a, base_channels);
        Network<T> net(spec);
        train(net, data, tc);
        const EvalReport rep = evaluate(net, data, Split::test, tc.batch_size);
        rows.push_back({g, rep.mean_error});
    }
    return rows;
}

} // namespace bfmlab

#endif
