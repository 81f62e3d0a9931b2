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

#include "bfmlab/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "bfmlab/container.hpp"
#include "bfmlab/errors.hpp"

namespace bfmlab
{

namespace
{

uint64_t fnv1a64(const std::string &bytes)
{
    uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : bytes)
    {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::string to_hex16(uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return std::string(buf, 16);
}

IndexRange range_from_json(const nlohmann::json &j)
{
    return IndexRange{j.at(0).get<int64_t>(), j.at(1).get<int64_t>()};
}

nlohmann::json range_to_json(const IndexRange &r)
{
    return nlohmann::json::array({r.begin, r.end});
}

} // namespace

int padded_length(int group_size)
{
    int f = 16;
    while (f < group_size)
        f *= 2;
    return f;
}

nlohmann::json sim_config_json(const SimConfig &config)
{
    return nlohmann::json{
        {"n_tx", config.n_tx},
        {"n_rx", config.n_rx},
        {"carrier_freq_hz", config.carrier_freq_hz},
        {"bandwidth_hz", config.bandwidth_hz},
        {"fft_size", config.fft_size},
        {"occupied_subcarriers", config.occupied_subcarriers},
        {"n_samples", config.n_samples},
        {"seed", config.seed},
    };
}

uint64_t sim_config_hash(const SimConfig &config)
{
    return fnv1a64(sim_config_json(config).dump());
}

IndexRange SplitRanges::of(Split s) const
{
    switch (s)
    {
    case Split::train:
        return train;
    case Split::val:
        return val;
    default:
        return test;
    }
}

SplitRanges compute_splits(int64_t n)
{
    const auto n_test = static_cast<int64_t>(std::llround(0.10 * static_cast<double>(n)));
    const int64_t pool = n - n_test;
    const auto n_val = static_cast<int64_t>(std::llround(0.10 * static_cast<double>(pool)));
    const int64_t n_train = pool - n_val;

    SplitRanges s;
    s.train = {0, n_train};
    s.val = {n_train, n_train + n_val};
    s.test = {n_train + n_val, n};
    return s;
}

nlohmann::json DatasetManifest::to_json() const
{
    return nlohmann::json{
        {"schema_version", schema_version},
        {"profile_name", profile_name},
        {"sim_config_hash", sim_config_hash_hex},
        {"seed", seed},
        {"n_rx", n_rx},
        {"n_tx", n_tx},
        {"n_realizations", n_realizations},
        {"group_size", group_size},
        {"groups_per_realization", groups_per_realization},
        {"f_pad", f_pad},
        {"n_samples", n_samples},
        {"scale", scale},
        {"splits",
         {{"train", range_to_json(splits.train)},
          {"val", range_to_json(splits.val)},
          {"test", range_to_json(splits.test)}}},
        {"subcarrier_indices", subcarrier_indices},
    };
}

DatasetManifest DatasetManifest::from_json(const nlohmann::json &j)
{
    DatasetManifest m;
    try
    {
        m.schema_version = j.at("schema_version").get<uint32_t>();
        m.profile_name = j.at("profile_name").get<std::string>();
        m.sim_config_hash_hex = j.at("sim_config_hash").get<std::string>();
        m.seed = j.at("seed").get<uint64_t>();
        m.n_rx = j.at("n_rx").get<int>();
        m.n_tx = j.at("n_tx").get<int>();
        m.n_realizations = j.at("n_realizations").get<int64_t>();
        m.group_size = j.at("group_size").get<int>();
        m.groups_per_realization = j.at("groups_per_realization").get<int>();
        m.f_pad = j.at("f_pad").get<int>();
        m.n_samples = j.at("n_samples").get<int64_t>();
        m.scale = j.at("scale").get<double>();
        const auto &s = j.at("splits");
        m.splits.train = range_from_json(s.at("train"));
        m.splits.val = range_from_json(s.at("val"));
        m.splits.test = range_from_json(s.at("test"));
        m.subcarrier_indices = j.at("subcarrier_indices").get<std::vector<int>>();
    }
    catch (const nlohmann::json::exception &e)
    {
        throw io_error(std::string("dataset manifest: missing or malformed field: ") + e.what());
    }
    return m;
}

std::vector<uint8_t> Dataset::mask() const
{
    std::vector<uint8_t> m(static_cast<size_t>(manifest.f_pad), 0);
    for (int k = 0; k < manifest.group_size; ++k)
        m[static_cast<size_t>(k)] = 1;
    return m;
}

Sample encode_sample(const BfmTensor &bfm, const CsiTensor &csi, double scale,
                     const std::vector<int> &group)
{
    if (bfm.subcarrier_indices != csi.subcarrier_indices)
        throw config_error("encode_sample: BFM and CSI subcarrier indices differ");
    if (group.empty())
        throw config_error("encode_sample: empty subcarrier group");
    if (csi.n_rx * csi.n_tx != bfm.n_tx * bfm.n_tx)
        throw config_error("encode_sample: antenna plane mismatch, the input needs "
                           "N_t^2 == N_r*N_t");
    if (scale <= 0.0 || !std::isfinite(scale))
        throw config_error("encode_sample: scale must be a positive finite real");

    const auto &all = csi.subcarrier_indices;
    const auto first = std::find(all.begin(), all.end(), group.front());
    if (first == all.end())
        throw config_error("encode_sample: group starts outside the subcarrier grid");
    const auto offset = static_cast<size_t>(first - all.begin());
    if (offset + group.size() > all.size() ||
        !std::equal(group.begin(), group.end(), first))
        throw config_error("encode_sample: group is not a consecutive run of the grid");

    const int g = static_cast<int>(group.size());
    const int f_pad = padded_length(g);
    const int a = csi.n_rx * csi.n_tx;

    Sample s;
    s.input = Tensor<float>({f_pad, a, 2});
    s.label = Tensor<float>({f_pad, a, 1});
    s.valid_mask.assign(static_cast<size_t>(f_pad), 0);

    for (int k = 0; k < g; ++k)
    {
        const int src = static_cast<int>(offset) + k;
        s.valid_mask[static_cast<size_t>(k)] = 1;
        for (int i = 0; i < csi.n_rx; ++i)
            for (int j = 0; j < csi.n_tx; ++j)
            {
                const int pair = i * csi.n_tx + j;
                const cd v = bfm.at(src, i, j);
                s.input[static_cast<size_t>((k * a + pair) * 2 + 0)] =
                    static_cast<float>(v.real());
                s.input[static_cast<size_t>((k * a + pair) * 2 + 1)] =
                    static_cast<float>(v.imag());
                const double amp = amp_phase(csi.at(src, i, j)).amplitude;
                s.label[static_cast<size_t>(k * a + pair)] = static_cast<float>(amp / scale);
            }
    }
    return s;
}

Dataset generate_dataset(const SimConfig &config, const ChannelProfile &profile, int group_size)
{
    SimConfig cfg = config;
    cfg.validate_and_finalize();

    const int k_total = static_cast<int>(cfg.occupied_subcarriers.size());
    if (group_size < 1 || k_total % group_size != 0)
        throw config_error("generate_dataset: group size " + std::to_string(group_size) +
                           " does not divide the " + std::to_string(k_total) +
                           "-subcarrier grid");

    const int groups = k_total / group_size;
    const int64_t n_real = cfg.n_samples;
    const SplitRanges real_splits = compute_splits(n_real);

    // RMS amplitude over the train split. Re-drawing realizations later is
    // exact because draws are keyed by (seed, index).
    double sum_sq = 0.0;
    int64_t count = 0;
    for (int64_t r = real_splits.train.begin; r < real_splits.train.end; ++r)
    {
        const CsiTensor csi =
            to_frequency_response(draw_realization(profile, cfg, static_cast<uint64_t>(r)), cfg);
        for (const cd &h : csi.h)
        {
            const double amp = amp_phase(h).amplitude;
            sum_sq += amp * amp;
            ++count;
        }
    }
    if (count == 0)
        throw config_error("generate_dataset: empty train split, increase n_samples");
    const double scale = std::sqrt(sum_sq / static_cast<double>(count));
    if (!(scale > 0.0) || !std::isfinite(scale))
        throw numeric_error("generate_dataset: degenerate normalization scale");

    Dataset d;
    d.manifest.profile_name = profile.name;
    d.manifest.sim_config_hash_hex = to_hex16(sim_config_hash(cfg));
    d.manifest.seed = cfg.seed;
    d.manifest.n_rx = cfg.n_rx;
    d.manifest.n_tx = cfg.n_tx;
    d.manifest.n_realizations = n_real;
    d.manifest.group_size = group_size;
    d.manifest.groups_per_realization = groups;
    d.manifest.f_pad = padded_length(group_size);
    d.manifest.n_samples = n_real * groups;
    d.manifest.scale = scale;
    d.manifest.splits.train = {real_splits.train.begin * groups, real_splits.train.end * groups};
    d.manifest.splits.val = {real_splits.val.begin * groups, real_splits.val.end * groups};
    d.manifest.splits.test = {real_splits.test.begin * groups, real_splits.test.end * groups};
    d.manifest.subcarrier_indices = cfg.occupied_subcarriers;

    const int f_pad = d.manifest.f_pad;
    const int a = cfg.n_rx * cfg.n_tx;
    const auto n_samples = static_cast<int>(d.manifest.n_samples);
    d.inputs = Tensor<float>({n_samples, f_pad, a, 2});
    d.labels = Tensor<float>({n_samples, f_pad, a, 1});

    const size_t in_stride = static_cast<size_t>(f_pad) * a * 2;
    const size_t lb_stride = static_cast<size_t>(f_pad) * a;

    for (int64_t r = 0; r < n_real; ++r)
    {
        const CsiTensor csi =
            to_frequency_response(draw_realization(profile, cfg, static_cast<uint64_t>(r)), cfg);
        const BfmTensor bfm = compute_bfm(csi);
        for (int gi = 0; gi < groups; ++gi)
        {
            const auto begin = cfg.occupied_subcarriers.begin() +
                               static_cast<ptrdiff_t>(gi) * group_size;
            const std::vector<int> group(begin, begin + group_size);
            const Sample s = encode_sample(bfm, csi, scale, group);
            const auto idx = static_cast<size_t>(r) * groups + gi;
            std::copy(s.input.vec().begin(), s.input.vec().end(),
                      d.inputs.vec().begin() + static_cast<ptrdiff_t>(idx * in_stride));
            std::copy(s.label.vec().begin(), s.label.vec().end(),
                      d.labels.vec().begin() + static_cast<ptrdiff_t>(idx * lb_stride));
        }
    }
    return d;
}

void save_dataset(const std::filesystem::path &path, const Dataset &d)
{
    Container c;
    c.magic = std::string(dataset_magic);
    c.manifest = d.manifest.to_json();

    auto dims_of = [](const Tensor<float> &t) {
        std::vector<uint32_t> dims;
        for (int i = 0; i < t.rank(); ++i)
            dims.push_back(static_cast<uint32_t>(t.dim(i)));
        return dims;
    };
    c.tensors.push_back(TensorBlock::from_f32(dims_of(d.inputs), d.inputs.vec()));
    c.tensors.push_back(TensorBlock::from_f32(dims_of(d.labels), d.labels.vec()));
    save_container(path, c);
}

Dataset load_dataset(const std::filesystem::path &path)
{
    const Container c = load_container(path, dataset_magic);
    Dataset d;
    d.manifest = DatasetManifest::from_json(c.manifest);
    if (c.tensors.size() != 2)
        throw io_error("dataset: expected 2 tensor blocks, found " +
                       std::to_string(c.tensors.size()));

    auto to_tensor = [&](const TensorBlock &b, const char *which) {
        if (b.dtype != 1)
            throw io_error(std::string("dataset: ") + which + " block is not float32");
        if (b.dims.size() != 4)
            throw io_error(std::string("dataset: ") + which + " block is not rank 4");
        std::vector<int> shape(b.dims.begin(), b.dims.end());
        Tensor<float> t(shape);
        t.vec() = b.f32;
        return t;
    };
    d.inputs = to_tensor(c.tensors[0], "input");
    d.labels = to_tensor(c.tensors[1], "label");

    const int a = d.manifest.n_rx * d.manifest.n_tx;
    const std::vector<int> in_shape{static_cast<int>(d.manifest.n_samples), d.manifest.f_pad, a, 2};
    const std::vector<int> lb_shape{static_cast<int>(d.manifest.n_samples), d.manifest.f_pad, a, 1};
    if (d.inputs.shape() != in_shape || d.labels.shape() != lb_shape)
        throw io_error("dataset: tensor shapes disagree with the manifest");
    return d;
}

} // namespace bfmlab
