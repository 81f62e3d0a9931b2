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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include <doctest.h>

#include "bfmlab/dataset.hpp"
#include "bfmlab/errors.hpp"

using namespace bfmlab;
namespace fs = std::filesystem;

namespace
{

SimConfig small_config(int n_samples, uint64_t seed)
{
    SimConfig c;
    c.n_samples = n_samples;
    c.seed = seed;
    c.validate_and_finalize();
    return c;
}

std::vector<char> read_bytes(const fs::path &path)
{
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::vector<char>(std::istreambuf_iterator<char>(in),
                             std::istreambuf_iterator<char>());
}

} // namespace

TEST_CASE("padded_length is the next power of two with a floor of 16")
{
    CHECK_EQ(padded_length(242), 256);
    CHECK_EQ(padded_length(121), 128);
    CHECK_EQ(padded_length(22), 32);
    CHECK_EQ(padded_length(11), 16);
    CHECK_EQ(padded_length(2), 16);
    CHECK_EQ(padded_length(1), 16);
    CHECK_EQ(padded_length(16), 16);
    CHECK_EQ(padded_length(17), 32);
}

TEST_CASE("compute_splits applies 10 percent twice")
{
    const SplitRanges big = compute_splits(10000);
    CHECK_EQ(big.train, IndexRange{0, 8100});
    CHECK_EQ(big.val, IndexRange{8100, 9000});
    CHECK_EQ(big.test, IndexRange{9000, 10000});

    const SplitRanges small = compute_splits(1000);
    CHECK_EQ(small.train, IndexRange{0, 810});
    CHECK_EQ(small.val, IndexRange{810, 900});
    CHECK_EQ(small.test, IndexRange{900, 1000});
}

TEST_CASE("compute_splits ranges are contiguous and exhaustive")
{
    for (int64_t n : {10L, 23L, 100L, 999L, 4096L})
    {
        const SplitRanges s = compute_splits(n);
        CHECK_EQ(s.train.begin, 0);
        CHECK_EQ(s.train.end, s.val.begin);
        CHECK_EQ(s.val.end, s.test.begin);
        CHECK_EQ(s.test.end, n);
        CHECK_GT(s.train.count(), 0);
    }
}

TEST_CASE("encode_sample places Re/Im and normalized amplitudes")
{
    // Two subcarriers, 2x2 antennas, hand-built values.
    CsiTensor csi;
    csi.n_rx = 2;
    csi.n_tx = 2;
    csi.subcarrier_indices = {-3, -2};
    csi.h = {
        cd(3.0, 4.0),  cd(0.0, 0.0), cd(1.0, 0.0), cd(0.0, -2.0), // k = -3
        cd(-1.0, 1.0), cd(2.0, 0.0), cd(0.0, 0.5), cd(1.0, 1.0),  // k = -2
    };

    BfmTensor bfm;
    bfm.n_tx = 2;
    bfm.subcarrier_indices = csi.subcarrier_indices;
    bfm.v = {
        cd(1.0, 0.0), cd(0.0, 0.0), cd(0.0, 0.0), cd(1.0, 0.0),  // k = -3
        cd(0.5, 0.5), cd(0.5, -0.5), cd(0.5, -0.5), cd(0.5, 0.5) // k = -2
    };

    const double scale = 2.0;
    const Sample s = encode_sample(bfm, csi, scale, csi.subcarrier_indices);

    REQUIRE_EQ(s.input.dim(0), 16);
    REQUIRE_EQ(s.input.dim(1), 4);
    REQUIRE_EQ(s.input.dim(2), 2);
    REQUIRE_EQ(s.label.dim(2), 1);

    // Input plane: Re/Im of V in (row, col) flattened antenna order.
    CHECK_EQ(s.input.at3(0, 0, 0), 1.0f);
    CHECK_EQ(s.input.at3(0, 0, 1), 0.0f);
    CHECK_EQ(s.input.at3(1, 1, 0), 0.5f);
    CHECK_EQ(s.input.at3(1, 1, 1), -0.5f);

    // Label plane: |h| / scale in the same antenna order.
    CHECK_EQ(s.label.at3(0, 0, 0), doctest::Approx(5.0 / scale));
    CHECK_EQ(s.label.at3(0, 3, 0), doctest::Approx(2.0 / scale));
    CHECK_EQ(s.label.at3(1, 0, 0), doctest::Approx(std::sqrt(2.0) / scale));
    CHECK_EQ(s.label.at3(1, 3, 0), doctest::Approx(std::sqrt(2.0) / scale));

    // Mask marks the two leading bins, padding is zero.
    REQUIRE_EQ(s.valid_mask.size(), 16);
    CHECK_EQ(s.valid_mask[0], 1);
    CHECK_EQ(s.valid_mask[1], 1);
    CHECK_EQ(s.valid_mask[2], 0);
    for (int f = 2; f < 16; ++f)
        for (int a = 0; a < 4; ++a)
        {
            CHECK_EQ(s.input.at3(f, a, 0), 0.0f);
            CHECK_EQ(s.label.at3(f, a, 0), 0.0f);
        }
}

TEST_CASE("encode_sample validates its inputs")
{
    CsiTensor csi;
    csi.n_rx = 2;
    csi.n_tx = 2;
    csi.subcarrier_indices = {-3, -2, 2};
    csi.h.assign(static_cast<size_t>(3) * 4, cd(1.0, 0.0));

    BfmTensor bfm;
    bfm.n_tx = 2;
    bfm.subcarrier_indices = csi.subcarrier_indices;
    bfm.v.assign(static_cast<size_t>(3) * 4, cd(1.0, 0.0));

    // Group that skips an index in the shared list.
    CHECK_THROWS_WITH_AS(encode_sample(bfm, csi, 1.0, {-3, 2}),
                         doctest::Contains("consecutive"), config_error);
    // Group with an index absent from the list.
    CHECK_THROWS_AS(encode_sample(bfm, csi, 1.0, {5}), config_error);
    // Empty group.
    CHECK_THROWS_AS(encode_sample(bfm, csi, 1.0, {}), config_error);
    // Degenerate scale.
    CHECK_THROWS_AS(encode_sample(bfm, csi, 0.0, {-3}), config_error);

    // Mismatched index lists.
    BfmTensor other = bfm;
    other.subcarrier_indices = {-3, -2, 3};
    CHECK_THROWS_AS(encode_sample(other, csi, 1.0, {-3}), config_error);

    // Non-square antenna geometry.
    CsiTensor rect;
    rect.n_rx = 1;
    rect.n_tx = 2;
    rect.subcarrier_indices = {-3};
    rect.h.assign(2, cd(1.0, 0.0));
    BfmTensor bfm1;
    bfm1.n_tx = 2;
    bfm1.subcarrier_indices = {-3};
    bfm1.v.assign(4, cd(1.0, 0.0));
    CHECK_THROWS_AS(encode_sample(bfm1, rect, 1.0, {-3}), config_error);
}

TEST_CASE("generate_dataset shapes and masks a grouped grid")
{
    const SimConfig config = small_config(10, 42);
    const ChannelProfile profile = load_profile("model-b");
    const Dataset d = generate_dataset(config, profile, 121);

    CHECK_EQ(d.manifest.group_size, 121);
    CHECK_EQ(d.manifest.groups_per_realization, 2);
    CHECK_EQ(d.manifest.f_pad, 128);
    CHECK_EQ(d.manifest.n_samples, 20);
    CHECK_EQ(d.manifest.n_realizations, 10);
    CHECK_EQ(d.manifest.profile_name, "model-b");
    CHECK_EQ(d.inputs.dim(0), 20);
    CHECK_EQ(d.inputs.dim(1), 128);
    CHECK_EQ(d.inputs.dim(2), 4);
    CHECK_EQ(d.inputs.dim(3), 2);
    CHECK_EQ(d.labels.dim(3), 1);

    const std::vector<uint8_t> mask = d.mask();
    REQUIRE_EQ(mask.size(), 128);
    for (int f = 0; f < 128; ++f)
        CHECK_EQ(mask[f], f < 121 ? 1 : 0);

    // Sample splits stay aligned to whole realizations.
    const SplitRanges r = compute_splits(10);
    CHECK_EQ(d.manifest.splits.train, IndexRange{r.train.begin * 2, r.train.end * 2});
    CHECK_EQ(d.manifest.splits.test, IndexRange{r.test.begin * 2, r.test.end * 2});
}

TEST_CASE("generate_dataset rejects group sizes that do not divide the grid")
{
    const SimConfig config = small_config(4, 1);
    const ChannelProfile profile = load_profile("flat1");
    CHECK_THROWS_AS(generate_dataset(config, profile, 3), config_error);
    CHECK_THROWS_AS(generate_dataset(config, profile, 0), config_error);
}

TEST_CASE("normalization makes the train-split label RMS one")
{
    const SimConfig config = small_config(40, 7);
    const ChannelProfile profile = load_profile("model-b");
    const Dataset d = generate_dataset(config, profile, 242);

    const IndexRange train = d.sample_range(Split::train);
    long double acc = 0.0L;
    int64_t n = 0;
    for (int64_t s = train.begin; s < train.end; ++s)
        for (int f = 0; f < d.manifest.group_size; ++f)
            for (int a = 0; a < 4; ++a)
            {
                const double v = d.labels.at4(s, f, a, 0);
                acc += static_cast<long double>(v) * v;
                ++n;
            }
    const double rms = std::sqrt(static_cast<double>(acc / n));
    // Labels are scaled by the train RMS amplitude, so their RMS must sit
    // at one up to f32 rounding.
    CHECK_EQ(rms, doctest::Approx(1.0).epsilon(1e-4));
    CHECK_GT(d.manifest.scale, 0.0);
}

TEST_CASE("dataset files round-trip bit-exactly")
{
    const SimConfig config = small_config(6, 3);
    const ChannelProfile profile = load_profile("model-b");
    const Dataset d = generate_dataset(config, profile, 121);

    const fs::path dir = fs::temp_directory_path() / "bfmlab_dataset_tests";
    fs::create_directories(dir);
    const fs::path a = dir / "a.bfmc";
    const fs::path b = dir / "b.bfmc";

    save_dataset(a, d);
    const Dataset back = load_dataset(a);
    CHECK_EQ(back.manifest.to_json(), d.manifest.to_json());
    CHECK_EQ(back.inputs.vec(), d.inputs.vec());
    CHECK_EQ(back.labels.vec(), d.labels.vec());

    save_dataset(b, back);
    CHECK_EQ(read_bytes(a), read_bytes(b));
}

TEST_CASE("generation is reproducible per seed and sensitive to it")
{
    const ChannelProfile profile = load_profile("model-b");
    const Dataset a = generate_dataset(small_config(5, 11), profile, 242);
    const Dataset b = generate_dataset(small_config(5, 11), profile, 242);
    const Dataset c = generate_dataset(small_config(5, 12), profile, 242);
    CHECK_EQ(a.inputs.vec(), b.inputs.vec());
    CHECK_EQ(a.labels.vec(), b.labels.vec());
    CHECK_NE(a.inputs.vec(), c.inputs.vec());
}

TEST_CASE("group size one keeps every realization's bins aligned")
{
    const ChannelProfile profile = load_profile("model-b");
    const SimConfig config = small_config(3, 21);
    const Dataset whole = generate_dataset(config, profile, 242);
    const Dataset single = generate_dataset(config, profile, 1);

    CHECK_EQ(single.manifest.groups_per_realization, 242);
    CHECK_EQ(single.manifest.n_samples, 3 * 242);
    CHECK_EQ(single.manifest.f_pad, 16);

    // Same seed and sample index produce the same channel, so the grouped
    // and per-subcarrier labels describe identical amplitudes up to their
    // dataset-specific scales.
    for (int k = 0; k < 242; k += 37)
        for (int a = 0; a < 4; ++a)
        {
            const double grouped = whole.labels.at4(0, k, a, 0) * whole.manifest.scale;
            const double alone = single.labels.at4(k, 0, a, 0) * single.manifest.scale;
            CHECK_EQ(grouped, doctest::Approx(alone).epsilon(1e-5));
        }
}

TEST_CASE("sim_config_hash tracks the config contents")
{
    SimConfig a = small_config(10, 1);
    SimConfig b = small_config(10, 1);
    CHECK_EQ(sim_config_hash(a), sim_config_hash(b));
    b.n_samples = 11;
    CHECK_NE(sim_config_hash(a), sim_config_hash(b));
    SimConfig c = small_config(10, 2);
    CHECK_NE(sim_config_hash(a), sim_config_hash(c));
}
