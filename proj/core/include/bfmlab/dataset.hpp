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

#ifndef BFMLAB_DATASET_HPP
#define BFMLAB_DATASET_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bfmlab/bfm.hpp"
#include "bfmlab/channel.hpp"
#include "bfmlab/tensor.hpp"

namespace bfmlab
{

/// Smallest power of two >= max(16, g); the frequency extent of encoded
/// sample tensors. 16 is the floor so four halvings stay integral.
int padded_length(int group_size);

/// Canonical JSON form of a simulation config (sorted keys) and its FNV-1a
/// 64-bit hash, used to tie datasets to the config that produced them.
nlohmann::json sim_config_json(const SimConfig &config);
uint64_t sim_config_hash(const SimConfig &config);

enum class Split
{
    train,
    val,
    test
};

/// Half-open [begin, end) index range.
struct IndexRange
{
    int64_t begin = 0;
    int64_t end = 0;

    int64_t count() const { return end - begin; }
    bool operator==(const IndexRange &) const = default;
};

/// Realization-level split sizes: 10% test, then 10% of the remaining pool
/// as validation (both rounded to nearest), remainder train. Ranges are
/// contiguous in the order train, val, test.
struct SplitRanges
{
    IndexRange train;
    IndexRange val;
    IndexRange test;

    IndexRange of(Split s) const;
    bool operator==(const SplitRanges &) const = default;
};

SplitRanges compute_splits(int64_t n);

struct DatasetManifest
{
    uint32_t schema_version = 1;
    std::string profile_name;
    std::string sim_config_hash_hex;
    uint64_t seed = 0;
    int n_rx = 0;
    int n_tx = 0;
    int64_t n_realizations = 0;
    int group_size = 0;
    int groups_per_realization = 0;
    int f_pad = 0;
    int64_t n_samples = 0;
    double scale = 1.0;
    SplitRanges splits; // in sample units
    std::vector<int> subcarrier_indices;

    nlohmann::json to_json() const;
    static DatasetManifest from_json(const nlohmann::json &j);
};

/// One encoded training pair. The input plane holds Re/Im of the BFM
/// entries, the label plane holds normalized amplitudes; both are
/// zero-padded along frequency to f_pad, and valid_mask flags the bins
/// that carry data.
struct Sample
{
    Tensor<float> input; // (f_pad, A, 2)
    Tensor<float> label; // (f_pad, A, 1)
    std::vector<uint8_t> valid_mask;
};

struct Dataset
{
    DatasetManifest manifest;
    Tensor<float> inputs; // (n_samples, f_pad, A, 2)
    Tensor<float> labels; // (n_samples, f_pad, A, 1)

    int64_t n_samples() const { return manifest.n_samples; }

    /// Shared per-bin validity mask: bins [0, group_size) carry data.
    std::vector<uint8_t> mask() const;

    IndexRange sample_range(Split s) const { return manifest.splits.of(s); }
};

/// Encode one (BFM, CSI) pair over `group`, a run of subcarrier indices
/// that must appear consecutively in the shared index list of bfm and csi.
/// Throws config_error when the index lists differ, the group is not a
/// consecutive run, or the antenna geometry is not square (the input plane
/// needs N_t^2 == N_r*N_t).
Sample encode_sample(const BfmTensor &bfm, const CsiTensor &csi, double scale,
                     const std::vector<int> &group);

/// Simulate config.n_samples channel realizations and encode each as
/// K/group_size samples (realization-major order). The normalization scale
/// is the RMS amplitude over the train split, computed before encoding.
/// Throws config_error when group_size does not divide the grid size.
Dataset generate_dataset(const SimConfig &config, const ChannelProfile &profile, int group_size);

void save_dataset(const std::filesystem::path &path, const Dataset &d);
Dataset load_dataset(const std::filesystem::path &path);

} // namespace bfmlab

#endif
